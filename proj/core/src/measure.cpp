#include "bsdelab/measure.hpp"

#include <cmath>
#include <functional>

#include "bsdelab/errors.hpp"
#include "bsdelab/math_util.hpp"

namespace bsdelab {

MeasureChange build_measure_change(const BrownianEnsemble& ens, const GeneratorSpec& f,
                                   const SolutionEnsemble& sol) {
  if (sol.n_paths != ens.n_paths() || sol.n_nodes != ens.grid().steps() + 1 ||
      sol.dim != ens.dim())
    throw DimensionError("build_measure_change: solution does not match ensemble");
  const std::size_t steps = ens.grid().steps();
  const std::size_t d = ens.dim();
  std::vector<double> g(sol.n_paths * steps * d);
  parallel_for(sol.n_paths, [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p)
      for (std::size_t i = 0; i < steps; ++i) {
        const std::span<const double> zr(sol.z.data() + (p * steps + i) * d, d);
        girsanov_kernel(f, ens.grid().node(i), sol.y_at(p, i), zr,
                        std::span<double>(g.data() + (p * steps + i) * d, d));
      }
  });
  AdaptedProcess kernel = AdaptedProcess::from_values(sol.n_paths, steps, d, std::move(g));
  return measure_change_from_kernel(ens, kernel, f.lipschitz_z);
}

MeasureChange measure_change_from_kernel(const BrownianEnsemble& ens, AdaptedProcess phi,
                                         double bound) {
  DensityPath density = stochastic_exponential(ens, phi, bound);
  const std::size_t last = density.n_nodes - 1;
  std::vector<double> dt(density.n_paths);
  for (std::size_t p = 0; p < density.n_paths; ++p) dt[p] = density.at(p, last);
  const MomentSummary ms = summarize(dt);
  return MeasureChange{std::move(phi), std::move(density), bound, ms.mean, ms.stderr_of_mean};
}

namespace {

QExpectation weighted_expectation(std::span<const double> values,
                                  const std::function<double(std::size_t)>& weight,
                                  std::size_t n, double ess_floor_fraction) {
  std::vector<double> prods(n), w(n);
  for (std::size_t p = 0; p < n; ++p) {
    w[p] = weight(p);
    prods[p] = values[p] * w[p];
  }
  const MomentSummary ms = summarize(prods);
  QExpectation q;
  q.value = ms.mean;
  q.stderr_of_mean = ms.stderr_of_mean;
  q.n = n;
  const double sw = pairwise_sum(w);
  std::vector<double> w2(n);
  for (std::size_t p = 0; p < n; ++p) w2[p] = w[p] * w[p];
  const double sw2 = pairwise_sum(w2);
  q.ess = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
  q.collapsed = q.ess < ess_floor_fraction * static_cast<double>(n);
  return q;
}

}  // namespace

QExpectation q_expectation(std::span<const double> values, const MeasureChange& mc,
                           std::size_t node, double ess_floor_fraction) {
  if (values.size() != mc.density.n_paths)
    throw DimensionError("q_expectation: values size != paths");
  if (node >= mc.density.n_nodes) throw DomainError("q_expectation: node out of range");
  return weighted_expectation(
      values, [&](std::size_t p) { return mc.density.at(p, node); }, values.size(),
      ess_floor_fraction);
}

QExpectation q_expectation_at(std::span<const double> values,
                              std::span<const std::size_t> nodes, const MeasureChange& mc,
                              double ess_floor_fraction) {
  if (values.size() != mc.density.n_paths || nodes.size() != values.size())
    throw DimensionError("q_expectation_at: size mismatch");
  for (std::size_t node : nodes)
    if (node >= mc.density.n_nodes) throw DomainError("q_expectation_at: node out of range");
  return weighted_expectation(
      values, [&](std::size_t p) { return mc.density.at(p, nodes[p]); }, values.size(),
      ess_floor_fraction);
}

std::string AdmissibilityReport::verdict_string() const {
  return verdict == AdmissibilityVerdict::admissible ? "ADMISSIBLE" : "UNSTABLE";
}

AdmissibilityReport admissibility_check(const TerminalSpec& xi, const PsiParams& params,
                                        const TimeGrid& grid, std::size_t dim, std::uint64_t seed,
                                        std::size_t n_paths, double stability_threshold) {
  if (n_paths < 2) throw DomainError("admissibility_check: need at least 2 paths");
  AdmissibilityReport rep;
  rep.mu = params.mu;
  rep.b = params.b;
  rep.horizon = grid.horizon();
  rep.n = n_paths;
  rep.stability_threshold = stability_threshold;

  // throws SubcriticalError below the critical mu, by design
  const double factor = exp_moment_bound(params, 0.0);

  // the 2n ensemble extends the n ensemble path-for-path (counter RNG),
  // so the comparison isolates what the extra tail paths contribute
  const BrownianEnsemble big = BrownianEnsemble::generate(grid, dim, 2 * n_paths, seed);
  const std::vector<double> vals = evaluate_terminal(xi, big);
  std::vector<double> w(2 * n_paths);
  for (std::size_t p = 0; p < 2 * n_paths; ++p) w[p] = psi(std::abs(vals[p]), params.mu);

  rep.psi_moment_n = pairwise_mean(std::span<const double>(w.data(), n_paths));
  rep.psi_moment_2n = pairwise_mean(w);
  rep.bound_rhs = factor + std::exp(2.0 * params.mu * params.mu) * rep.psi_moment_2n;

  std::vector<double> w2(w.size());
  for (std::size_t p = 0; p < w.size(); ++p) w2[p] = w[p] * w[p];
  const double sw = pairwise_sum(w);
  const double sw2 = pairwise_sum(w2);
  rep.ess = sw2 > 0.0 ? sw * sw / sw2 : static_cast<double>(w.size());

  const bool finite = std::isfinite(rep.psi_moment_n) && std::isfinite(rep.psi_moment_2n);
  const double drift = std::abs(rep.psi_moment_2n - rep.psi_moment_n);
  const double scale = std::max(std::abs(rep.psi_moment_n), 1e-300);
  rep.verdict = (finite && drift <= stability_threshold * scale)
                    ? AdmissibilityVerdict::admissible
                    : AdmissibilityVerdict::unstable;
  return rep;
}

QExpectation measure_price(const BrownianEnsemble& ens, const TerminalSpec& xi,
                           const MeasureChange& mc,
                           const std::optional<AdmissibilityReport>& admissibility,
                           bool override_admissibility, double ess_floor_fraction) {
  if (!override_admissibility) {
    if (!admissibility)
      throw AdmissibilityError("measure_price: no admissibility report supplied");
    if (admissibility->verdict != AdmissibilityVerdict::admissible)
      throw AdmissibilityError("measure_price: terminal admissibility verdict is " +
                               admissibility->verdict_string());
  }
  const std::vector<double> vals = evaluate_terminal(xi, ens);
  return q_expectation(vals, mc, mc.density.n_nodes - 1, ess_floor_fraction);
}

}  // namespace bsdelab
