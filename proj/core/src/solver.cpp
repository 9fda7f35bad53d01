#include "bsdelab/solver.hpp"

#include <algorithm>
#include <cmath>

#include "bsdelab/checks.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/math_util.hpp"

namespace bsdelab {

double SolutionEnsemble::mean_y(std::size_t node) const {
  std::vector<double> col(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) col[p] = y[p * n_nodes + node];
  return pairwise_mean(col);
}

std::string SolutionEnsemble::digest() const {
  std::uint64_t h = fnv1a(y.data(), y.size() * sizeof(double));
  h = fnv1a(z.data(), z.size() * sizeof(double), h);
  return to_hex(h);
}

namespace {

void run_prechecks(const BsdeProblem& problem, const BrownianEnsemble& ens,
                   const SolverOptions& options) {
  if (!options.run_declaration_checks) return;
  CheckConfig cfg;
  cfg.horizon = ens.grid().horizon();
  cfg.dim = ens.dim();
  cfg.n_samples = options.check_samples;
  cfg.seed = 77001;
  require_declared_constants(problem.generator, cfg);
}

// twice the closed-form a-priori bound at t = 0; also the guard that the
// clip can only be requested in the supercritical regime
double compute_clip_limit(const BsdeProblem& problem, const BrownianEnsemble& ens,
                          std::span<const double> xi, const PsiParams& params) {
  const TimeGrid& grid = ens.grid();
  const double first = exp_moment_bound(params, 0.0);  // throws if subcritical
  double f0_integral = 0.0;
  for (std::size_t j = 0; j < grid.steps(); ++j)
    f0_integral += std::abs(problem.generator.at_zero(grid.node(j), 0.0, ens.dim())) * grid.dt(j);
  const double psi_m = blocked_sum(xi.size(), kDefaultBlock,
                                   [&](std::size_t b, std::size_t e) {
                                     double acc = 0.0;
                                     for (std::size_t p = b; p < e; ++p)
                                       acc += psi(std::abs(xi[p]) + f0_integral, params.mu);
                                     return acc;
                                   }) /
                       static_cast<double>(xi.size());
  const double a = problem.generator.linear_growth;
  const double horizon = grid.horizon();
  const double bound =
      first * std::exp(a * horizon) + std::exp(2.0 * params.mu * params.mu + a * horizon) * psi_m;
  return 2.0 * bound;
}

struct NodeCounters {
  std::size_t inner = 0;
  std::size_t clips = 0;
  bool fallback = false;
};

}  // namespace

SolutionEnsemble solve_backward_euler(const BsdeProblem& problem, const BrownianEnsemble& ens,
                                      const SolverOptions& options) {
  run_prechecks(problem, ens, options);

  const TimeGrid& grid = ens.grid();
  const std::size_t n = ens.n_paths();
  const std::size_t steps = grid.steps();
  const std::size_t d = ens.dim();
  const BrownianLevels levels = BrownianLevels::from(ens);
  const std::vector<double> xi = evaluate_terminal(problem.terminal, ens);

  SolutionEnsemble sol;
  sol.n_paths = n;
  sol.n_nodes = steps + 1;
  sol.dim = d;
  sol.y.assign(n * sol.n_nodes, 0.0);
  sol.z.assign(n * steps * d, 0.0);
  sol.meta.scheme = "backward_euler";
  sol.meta.basis = options.basis.describe();
  for (std::size_t p = 0; p < n; ++p) sol.y[p * sol.n_nodes + steps] = xi[p];

  double clip_limit = 0.0;
  if (options.clip_params) {
    clip_limit = compute_clip_limit(problem, ens, xi, *options.clip_params);
    sol.meta.clip_limit = clip_limit;
  }

  std::vector<double> next(n), cy(n), target(n), zcol(n);
  const std::size_t bs = kDefaultBlock;
  const std::size_t nblocks = (n + bs - 1) / bs;

  for (std::size_t i = steps; i-- > 0;) {
    const double t = grid.node(i);
    const double dt = grid.dt(i);
    for (std::size_t p = 0; p < n; ++p) next[p] = sol.y[p * sol.n_nodes + i + 1];

    NodeRegressor reg(options.basis, levels.row(0, i), levels.n_nodes * levels.dim, n, d, i);
    sol.meta.max_condition_number =
        std::max(sol.meta.max_condition_number, reg.condition_number());
    reg.fit_predict(next, cy);

    std::vector<NodeCounters> counters(nblocks);
    if (options.clip_params) {
      parallel_for(nblocks, [&](std::size_t bb, std::size_t be) {
        for (std::size_t blk = bb; blk < be; ++blk) {
          const std::size_t pe = std::min(n, (blk + 1) * bs);
          for (std::size_t p = blk * bs; p < pe; ++p)
            if (std::abs(cy[p]) > clip_limit) {
              cy[p] = std::clamp(cy[p], -clip_limit, clip_limit);
              ++counters[blk].clips;
            }
        }
      });
    }

    for (std::size_t k = 0; k < d; ++k) {
      parallel_for(n, [&](std::size_t pb, std::size_t pe) {
        for (std::size_t p = pb; p < pe; ++p)
          target[p] = (next[p] - cy[p]) * ens.increment(p, i, k) / dt;
      });
      reg.fit_predict(target, zcol);
      for (std::size_t p = 0; p < n; ++p) sol.z[(p * steps + i) * d + k] = zcol[p];
    }

    parallel_for(nblocks, [&](std::size_t bb, std::size_t be) {
      for (std::size_t blk = bb; blk < be; ++blk) {
        const std::size_t pe = std::min(n, (blk + 1) * bs);
        for (std::size_t p = blk * bs; p < pe; ++p) {
          const std::span<const double> zr(sol.z.data() + (p * steps + i) * d, d);
          double yv = cy[p];
          bool ok = false;
          for (std::size_t it = 0; it < options.max_inner; ++it) {
            ++counters[blk].inner;
            const double proposed = cy[p] + problem.generator(t, yv, zr) * dt;
            if (proposed == yv) {  // exact fixed point, keep the bits
              ok = true;
              break;
            }
            const double ynew = (1.0 - options.damping) * yv + options.damping * proposed;
            if (!std::isfinite(ynew) || std::abs(ynew) > 1e100) break;
            const bool done = std::abs(ynew - yv) <= options.inner_tol * (1.0 + std::abs(ynew));
            yv = ynew;
            if (done) {
              ok = true;
              break;
            }
          }
          if (!ok) {
            // damped iteration refused to settle: take the explicit step
            counters[blk].fallback = true;
            yv = cy[p] + problem.generator(t, cy[p], zr) * dt;
          }
          sol.y[p * sol.n_nodes + i] = yv;
        }
      }
    });

    bool fell_back = false;
    for (const auto& c : counters) {
      sol.meta.inner_iterations += c.inner;
      sol.meta.clip_count += c.clips;
      fell_back = fell_back || c.fallback;
    }
    if (fell_back) sol.meta.fallback_nodes.push_back(i);
  }
  std::reverse(sol.meta.fallback_nodes.begin(), sol.meta.fallback_nodes.end());
  return sol;
}

SolutionEnsemble solve_picard(const BsdeProblem& problem, const BrownianEnsemble& ens,
                              const SolverOptions& options) {
  run_prechecks(problem, ens, options);

  const TimeGrid& grid = ens.grid();
  const std::size_t n = ens.n_paths();
  const std::size_t steps = grid.steps();
  const std::size_t d = ens.dim();
  const BrownianLevels levels = BrownianLevels::from(ens);
  const std::vector<double> xi = evaluate_terminal(problem.terminal, ens);

  SolutionEnsemble sol;
  sol.n_paths = n;
  sol.n_nodes = steps + 1;
  sol.dim = d;
  sol.y.assign(n * sol.n_nodes, 0.0);
  sol.z.assign(n * steps * d, 0.0);
  const std::size_t slice =
      options.picard_slice_nodes == 0 ? steps : options.picard_slice_nodes;
  sol.meta.scheme = options.picard_slice_nodes == 0
                        ? "picard"
                        : "picard[slice=" + std::to_string(options.picard_slice_nodes) + "]";
  sol.meta.basis = options.basis.describe();
  for (std::size_t p = 0; p < n; ++p) sol.y[p * sol.n_nodes + steps] = xi[p];

  double clip_limit = 0.0;
  if (options.clip_params) {
    clip_limit = compute_clip_limit(problem, ens, xi, *options.clip_params);
    sol.meta.clip_limit = clip_limit;
  }

  std::vector<double> s_acc(n * (steps + 1));
  std::vector<double> ynew(n), target(n), zcol(n), cys(n);

  // slices run from the far end; each freezes its node range before the
  // next one starts, with the frozen left-boundary values as its terminal
  std::size_t hi = steps;
  while (hi > 0) {
    const std::size_t lo = hi > slice ? hi - slice : 0;

    std::vector<NodeRegressor> regs;
    regs.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      regs.emplace_back(options.basis, levels.row(0, i), levels.n_nodes * levels.dim, n, d, i);
      sol.meta.max_condition_number =
          std::max(sol.meta.max_condition_number, regs.back().condition_number());
    }

    bool slice_converged = false;
    for (std::size_t sweep = 0; sweep < options.picard_max_sweeps; ++sweep) {
      ++sol.meta.sweeps;
      // S_i = Y_hi + sum_{j=i}^{hi-1} f(t_j, Y_j, Z_j) dt_j, backward scan
      parallel_for(n, [&](std::size_t pb, std::size_t pe) {
        for (std::size_t p = pb; p < pe; ++p) {
          double acc = sol.y[p * sol.n_nodes + hi];
          s_acc[p * (steps + 1) + hi] = acc;
          for (std::size_t i = hi; i-- > lo;) {
            const std::span<const double> zr(sol.z.data() + (p * steps + i) * d, d);
            acc += problem.generator(grid.node(i), sol.y[p * sol.n_nodes + i], zr) * grid.dt(i);
            s_acc[p * (steps + 1) + i] = acc;
          }
        }
      });

      double delta = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        const NodeRegressor& reg = regs[i - lo];
        const double dt = grid.dt(i);

        // project S_i for the new Y_i
        for (std::size_t p = 0; p < n; ++p) target[p] = s_acc[p * (steps + 1) + i];
        reg.fit_predict(target, ynew);
        if (options.clip_params) {
          std::size_t clips = 0;
          for (std::size_t p = 0; p < n; ++p)
            if (std::abs(ynew[p]) > clip_limit) {
              ynew[p] = std::clamp(ynew[p], -clip_limit, clip_limit);
              ++clips;
            }
          sol.meta.clip_count += clips;
        }

        // centered Z from the slice value one node ahead
        for (std::size_t p = 0; p < n; ++p) target[p] = s_acc[p * (steps + 1) + i + 1];
        reg.fit_predict(target, cys);
        for (std::size_t k = 0; k < d; ++k) {
          parallel_for(n, [&](std::size_t pb, std::size_t pe) {
            for (std::size_t p = pb; p < pe; ++p)
              target[p] = (s_acc[p * (steps + 1) + i + 1] - cys[p]) * ens.increment(p, i, k) / dt;
          });
          reg.fit_predict(target, zcol);
          for (std::size_t p = 0; p < n; ++p) sol.z[(p * steps + i) * d + k] = zcol[p];
        }

        const double node_delta =
            blocked_sum(n, kDefaultBlock,
                        [&](std::size_t b, std::size_t e) {
                          double acc = 0.0;
                          for (std::size_t p = b; p < e; ++p)
                            acc += std::abs(ynew[p] - sol.y[p * sol.n_nodes + i]);
                          return acc;
                        }) /
            static_cast<double>(n);
        delta = std::max(delta, node_delta);
        for (std::size_t p = 0; p < n; ++p) sol.y[p * sol.n_nodes + i] = ynew[p];
      }
      sol.meta.last_sweep_delta = delta;
      if (delta <= options.picard_tol) {
        slice_converged = true;
        break;
      }
    }
    sol.meta.converged = sol.meta.converged && slice_converged;
    hi = lo;
  }
  return sol;
}

}  // namespace bsdelab
