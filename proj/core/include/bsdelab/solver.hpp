#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bsdelab/brownian.hpp"
#include "bsdelab/generator.hpp"
#include "bsdelab/psi.hpp"
#include "bsdelab/regression.hpp"

namespace bsdelab {

/// Terminal-value problem y_t = xi + int_t^T f(s, y_s, z_s) ds - int_t^T z_s dW_s.
struct BsdeProblem {
  GeneratorSpec generator;
  TerminalSpec terminal;

  BsdeProblem(GeneratorSpec f, TerminalSpec xi)
      : generator(std::move(f)), terminal(std::move(xi)) {}
};

struct SolverOptions {
  BasisSpec basis;
  double damping = 0.5;         // inner fixed-point relaxation
  std::size_t max_inner = 50;   // per-node iteration cap before fallback
  double inner_tol = 1e-12;

  // Optional a-priori clip: predictions are clamped at twice the
  // closed-form bound computed from (params, declared a) and the
  // psi-moment of |xi| + int |f(s,0,0)| ds. Needs the supercritical regime.
  std::optional<PsiParams> clip_params;

  bool run_declaration_checks = true;
  std::size_t check_samples = 4000;

  // Picard-only knobs
  std::size_t picard_max_sweeps = 30;
  double picard_tol = 1e-6;
  std::size_t picard_slice_nodes = 0;  // 0 = whole horizon in one slice
};

struct SolverMeta {
  std::string scheme;
  std::string basis;
  std::size_t inner_iterations = 0;
  std::vector<std::size_t> fallback_nodes;  // explicit-step fallbacks
  std::size_t clip_count = 0;
  double clip_limit = 0.0;
  double max_condition_number = 0.0;
  std::size_t sweeps = 0;        // Picard outer sweeps
  bool converged = true;         // Picard outer convergence
  double last_sweep_delta = 0.0;
};

/// Discrete solution on the ensemble's grid: Y at nodes [path][node],
/// Z on steps [path][step][dim]. Y at the last node is the terminal sample
/// bitwise (no scheme is allowed to touch it).
struct SolutionEnsemble {
  std::size_t n_paths = 0;
  std::size_t n_nodes = 0;
  std::size_t dim = 0;
  std::vector<double> y;  // n_paths * n_nodes
  std::vector<double> z;  // n_paths * (n_nodes-1) * dim
  SolverMeta meta;

  double y_at(std::size_t path, std::size_t node) const noexcept {
    return y[path * n_nodes + node];
  }
  const double* z_row(std::size_t path, std::size_t step) const noexcept {
    return z.data() + (path * (n_nodes - 1) + step) * dim;
  }
  /// Cross-sectional mean of Y at a node (pairwise-summed).
  double mean_y(std::size_t node) const;
  std::string digest() const;
};

/// Backward Euler with least-squares conditional expectations and an
/// implicit-in-y damped fixed point per node. The Z regression is centered:
///   Z_i ≈ E[(Y_{i+1} - E[Y_{i+1}|F_i]) dW_i | F_i] / dt_i,
/// which kills the O(1/dt) variance of the naive estimator and returns an
/// exact zero when Y_{i+1} is already measurable at node i.
SolutionEnsemble solve_backward_euler(const BsdeProblem& problem, const BrownianEnsemble& ens,
                                      const SolverOptions& options);

/// Global Picard iteration: repeated regression of xi + sum f dt onto each
/// node, optionally restarted slice by slice from the far end (for long
/// horizons where one global contraction is too slow).
SolutionEnsemble solve_picard(const BsdeProblem& problem, const BrownianEnsemble& ens,
                              const SolverOptions& options);

}  // namespace bsdelab
