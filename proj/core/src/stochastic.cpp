#include "bsdelab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsdelab/errors.hpp"
#include "bsdelab/math_util.hpp"

namespace bsdelab {

AdaptedProcess AdaptedProcess::from_history(const BrownianEnsemble& ens, const HistoryFn& fn) {
  const std::size_t n = ens.n_paths();
  const std::size_t steps = ens.grid().steps();
  const std::size_t d = ens.dim();
  std::vector<double> vals(n * steps * d);
  parallel_for(n, [&](std::size_t pb, std::size_t pe) {
    std::vector<double> level(d);
    for (std::size_t p = pb; p < pe; ++p) {
      std::fill(level.begin(), level.end(), 0.0);
      for (std::size_t i = 0; i < steps; ++i) {
        fn(p, i, ens.grid().node(i), std::span<const double>(level),
           std::span<double>(vals.data() + (p * steps + i) * d, d));
        for (std::size_t k = 0; k < d; ++k) level[k] += ens.increment(p, i, k);
      }
    }
  });
  return AdaptedProcess(n, steps, d, std::move(vals));
}

AdaptedProcess AdaptedProcess::constant(const BrownianEnsemble& ens,
                                        std::span<const double> coeffs) {
  if (coeffs.size() != ens.dim())
    throw DimensionError("AdaptedProcess::constant: coefficient count != ensemble dim");
  const std::size_t n = ens.n_paths();
  const std::size_t steps = ens.grid().steps();
  const std::size_t d = ens.dim();
  std::vector<double> vals(n * steps * d);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < steps; ++i)
      for (std::size_t k = 0; k < d; ++k) vals[(p * steps + i) * d + k] = coeffs[k];
  return AdaptedProcess(n, steps, d, std::move(vals));
}

AdaptedProcess AdaptedProcess::from_values(std::size_t n_paths, std::size_t steps,
                                           std::size_t dim, std::vector<double> values) {
  if (values.size() != n_paths * steps * dim)
    throw DimensionError("AdaptedProcess::from_values: size mismatch");
  return AdaptedProcess(n_paths, steps, dim, std::move(values));
}

double AdaptedProcess::norm_sq(std::size_t path, std::size_t step) const noexcept {
  const double* r = row(path, step);
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) s += r[k] * r[k];
  return s;
}

namespace {

void check_compatible(const BrownianEnsemble& ens, const AdaptedProcess& phi) {
  if (phi.n_paths() != ens.n_paths() || phi.steps() != ens.grid().steps() ||
      phi.dim() != ens.dim())
    throw DimensionError("process shape does not match ensemble");
}

}  // namespace

std::vector<double> ito_integral(const BrownianEnsemble& ens, const AdaptedProcess& phi,
                                 std::size_t up_to) {
  check_compatible(ens, phi);
  if (up_to > ens.grid().steps()) throw DomainError("ito_integral: up_to beyond last step");
  std::vector<double> out(ens.n_paths(), 0.0);
  const std::size_t d = ens.dim();
  parallel_for(ens.n_paths(), [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < up_to; ++i) {
        const double* r = phi.row(p, i);
        for (std::size_t k = 0; k < d; ++k) s += r[k] * ens.increment(p, i, k);
      }
      out[p] = s;
    }
  });
  return out;
}

double DensityPath::at(std::size_t path, std::size_t node) const noexcept {
  return std::exp(log_at(path, node));
}

DensityPath stochastic_exponential(const BrownianEnsemble& ens, const AdaptedProcess& phi,
                                   double bound) {
  check_compatible(ens, phi);
  if (!(bound >= 0.0) || !std::isfinite(bound))
    throw DomainError("stochastic_exponential: bound must be finite and nonnegative");
  const double limit_sq = bound * bound * (1.0 + 1e-10) + 1e-12;
  const std::size_t steps = ens.grid().steps();
  const std::size_t d = ens.dim();
  DensityPath dp;
  dp.n_paths = ens.n_paths();
  dp.n_nodes = steps + 1;
  dp.log_values.assign(dp.n_paths * dp.n_nodes, 0.0);

  // scan for bound violations before filling anything, so the error carries
  // the first offending (path, step) instead of a half-built density
  for (std::size_t p = 0; p < dp.n_paths; ++p)
    for (std::size_t i = 0; i < steps; ++i)
      if (!(phi.norm_sq(p, i) <= limit_sq)) {
        std::ostringstream os;
        os << "stochastic_exponential: |phi|=" << std::sqrt(phi.norm_sq(p, i))
           << " exceeds declared bound " << bound << " at path " << p << ", step " << i
           << "; declared Lipschitz-in-z constant looks false";
        throw BoundViolationError(os.str());
      }

  parallel_for(dp.n_paths, [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p) {
      double acc = 0.0;
      double* row = dp.log_values.data() + p * dp.n_nodes;
      row[0] = 0.0;
      for (std::size_t i = 0; i < steps; ++i) {
        const double* r = phi.row(p, i);
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot += r[k] * ens.increment(p, i, k);
        acc += dot - 0.5 * phi.norm_sq(p, i) * ens.grid().dt(i);
        row[i + 1] = acc;
      }
    }
  });
  return dp;
}

BrownianEnsemble drift_shifted_ensemble(const BrownianEnsemble& ens, const AdaptedProcess& phi) {
  check_compatible(ens, phi);
  const std::size_t steps = ens.grid().steps();
  const std::size_t d = ens.dim();
  std::vector<double> inc(ens.raw());
  parallel_for(ens.n_paths(), [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p)
      for (std::size_t i = 0; i < steps; ++i) {
        const double* r = phi.row(p, i);
        double* out = inc.data() + (p * steps + i) * d;
        for (std::size_t k = 0; k < d; ++k) out[k] -= r[k] * ens.grid().dt(i);
      }
  });
  return BrownianEnsemble::from_increments(ens.grid(), d, ens.n_paths(), ens.seed(),
                                           std::move(inc), true);
}

}  // namespace bsdelab
