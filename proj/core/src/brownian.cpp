#include "bsdelab/brownian.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "bsdelab/errors.hpp"
#include "bsdelab/math_util.hpp"
#include "bsdelab/rng.hpp"

namespace bsdelab {

namespace {

void check_budget(std::size_t n_paths, std::size_t steps, std::size_t dim,
                  std::size_t budget_doubles) {
  // overflow-safe: divide instead of multiply
  if (steps == 0 || dim == 0 || n_paths == 0)
    throw DomainError("BrownianEnsemble: paths, steps and dim must be positive");
  const std::size_t per_path = steps * dim;
  if (per_path / dim != steps || budget_doubles / per_path < n_paths) {
    std::ostringstream os;
    os << "BrownianEnsemble: " << n_paths << " x " << steps << " x " << dim
       << " doubles exceeds budget " << budget_doubles;
    throw ResourceError(os.str());
  }
}

}  // namespace

BrownianEnsemble BrownianEnsemble::generate(TimeGrid grid, std::size_t dim, std::size_t n_paths,
                                            std::uint64_t seed, std::size_t budget_doubles) {
  const std::size_t steps = grid.steps();
  check_budget(n_paths, steps, dim, budget_doubles);
  std::vector<double> inc(n_paths * steps * dim);
  std::vector<double> sqrt_dt(steps);
  for (std::size_t i = 0; i < steps; ++i) sqrt_dt[i] = std::sqrt(grid.dt(i));
  parallel_for(n_paths, [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p) {
      double* row = inc.data() + p * steps * dim;
      for (std::size_t i = 0; i < steps; ++i)
        for (std::size_t k = 0; k < dim; ++k)
          row[i * dim + k] = sqrt_dt[i] * counter_normal(seed, p, i, k, NoiseStream::increments);
    }
  });
  return BrownianEnsemble(std::move(grid), dim, n_paths, seed, std::move(inc), false);
}

BrownianEnsemble BrownianEnsemble::from_increments(TimeGrid grid, std::size_t dim,
                                                   std::size_t n_paths, std::uint64_t seed,
                                                   std::vector<double> increments, bool derived) {
  if (increments.size() != n_paths * grid.steps() * dim)
    throw DimensionError("BrownianEnsemble::from_increments: size mismatch");
  return BrownianEnsemble(std::move(grid), dim, n_paths, seed, std::move(increments), derived);
}

std::vector<double> BrownianEnsemble::terminal_level(std::size_t path) const {
  std::vector<double> w(dim_, 0.0);
  const std::size_t steps = grid_.steps();
  const double* row = increments_.data() + path * steps * dim_;
  for (std::size_t i = 0; i < steps; ++i)
    for (std::size_t k = 0; k < dim_; ++k) w[k] += row[i * dim_ + k];
  return w;
}

std::string BrownianEnsemble::digest() const {
  std::uint64_t h = fnv1a(increments_.data(), increments_.size() * sizeof(double));
  h = fnv1a(grid_.nodes().data(), grid_.nodes().size() * sizeof(double), h);
  return to_hex(h);
}

BrownianLevels BrownianLevels::from(const BrownianEnsemble& ens) {
  BrownianLevels lv;
  lv.n_paths = ens.n_paths();
  lv.n_nodes = ens.grid().steps() + 1;
  lv.dim = ens.dim();
  lv.values.assign(lv.n_paths * lv.n_nodes * lv.dim, 0.0);
  const std::size_t steps = ens.grid().steps();
  parallel_for(lv.n_paths, [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p) {
      double* row = lv.values.data() + p * lv.n_nodes * lv.dim;
      for (std::size_t i = 0; i < steps; ++i)
        for (std::size_t k = 0; k < lv.dim; ++k)
          row[(i + 1) * lv.dim + k] = row[i * lv.dim + k] + ens.increment(p, i, k);
    }
  });
  return lv;
}

BrownianEnsemble refine_halving(const BrownianEnsemble& ens) {
  const TimeGrid fine = ens.grid().refined_halving();
  const std::size_t steps = ens.grid().steps();
  const std::size_t dim = ens.dim();
  const std::size_t n = ens.n_paths();
  std::vector<double> inc(n * 2 * steps * dim);
  parallel_for(n, [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p) {
      double* row = inc.data() + p * 2 * steps * dim;
      for (std::size_t i = 0; i < steps; ++i) {
        const double half_sd = 0.5 * std::sqrt(ens.grid().dt(i));
        for (std::size_t k = 0; k < dim; ++k) {
          const double coarse = ens.increment(p, i, k);
          // conditional midpoint: N(coarse/2, dt/4); the second half is the
          // complement, so the pair reproduces the coarse increment up to
          // one rounding of the halves (exact only when they don't dwarf it)
          const double first =
              0.5 * coarse + half_sd * counter_normal(ens.seed(), p, i, k, NoiseStream::bridge);
          row[(2 * i) * dim + k] = first;
          row[(2 * i + 1) * dim + k] = coarse - first;
        }
      }
    }
  });
  return BrownianEnsemble::from_increments(fine, dim, n, ens.seed(), std::move(inc), true);
}

void dump_increments_csv(const BrownianEnsemble& ens, std::ostream& os) {
  os << "path,step,dim,increment\n";
  os.precision(17);
  for (std::size_t p = 0; p < ens.n_paths(); ++p)
    for (std::size_t i = 0; i < ens.grid().steps(); ++i)
      for (std::size_t k = 0; k < ens.dim(); ++k)
        os << p << ',' << i << ',' << k << ',' << ens.increment(p, i, k) << '\n';
}

}  // namespace bsdelab
