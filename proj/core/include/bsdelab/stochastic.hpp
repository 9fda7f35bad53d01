#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bsdelab/brownian.hpp"

namespace bsdelab {

/// Piecewise-constant d-dimensional process phi_{t_i} on the steps of an
/// ensemble, flat [path][step][dim]. Adaptedness is enforced structurally:
/// the only evaluation hook sees the Brownian level at the step's left node,
/// never the step's own increment.
class AdaptedProcess {
 public:
  using HistoryFn = std::function<void(std::size_t path, std::size_t step, double t,
                                       std::span<const double> w_level, std::span<double> out)>;

  static AdaptedProcess from_history(const BrownianEnsemble& ens, const HistoryFn& fn);
  static AdaptedProcess constant(const BrownianEnsemble& ens, std::span<const double> coeffs);

  /// Adopts precomputed values. The caller vouches that values[p][i][*] are
  /// measurable at node i (solver outputs are, by construction).
  static AdaptedProcess from_values(std::size_t n_paths, std::size_t steps, std::size_t dim,
                                    std::vector<double> values);

  double value(std::size_t path, std::size_t step, std::size_t k) const noexcept {
    return values_[(path * steps_ + step) * dim_ + k];
  }
  const double* row(std::size_t path, std::size_t step) const noexcept {
    return values_.data() + (path * steps_ + step) * dim_;
  }
  double norm_sq(std::size_t path, std::size_t step) const noexcept;

  std::size_t n_paths() const noexcept { return n_paths_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t dim() const noexcept { return dim_; }

 private:
  AdaptedProcess(std::size_t n_paths, std::size_t steps, std::size_t dim,
                 std::vector<double> values)
      : n_paths_(n_paths), steps_(steps), dim_(dim), values_(std::move(values)) {}

  std::size_t n_paths_;
  std::size_t steps_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// Per-path Ito sums  sum_{i < up_to} phi_i . dW_i  (step order, so the
/// result is reproducible independently of path partitioning).
std::vector<double> ito_integral(const BrownianEnsemble& ens, const AdaptedProcess& phi,
                                 std::size_t up_to);

/// Log-space discrete stochastic exponential of phi against the ensemble:
///   log D_{t_j} = sum_{i<j} [ phi_i . dW_i - 0.5 |phi_i|^2 dt_i ].
/// Stored in log space; D itself never overflows or hits zero.
struct DensityPath {
  std::size_t n_paths = 0;
  std::size_t n_nodes = 0;
  std::vector<double> log_values;  // [path][node]

  double log_at(std::size_t path, std::size_t node) const noexcept {
    return log_values[path * n_nodes + node];
  }
  double at(std::size_t path, std::size_t node) const noexcept;
};

/// Throws BoundViolationError if any |phi_i(p)| exceeds `bound` beyond
/// rounding slack; the bound is what makes the exponential a martingale
/// with the moments the library relies on.
DensityPath stochastic_exponential(const BrownianEnsemble& ens, const AdaptedProcess& phi,
                                   double bound);

/// Girsanov shift: increments dW - phi dt on the same grid, i.e. the driving
/// noise seen under the measure with density E(phi . W).
BrownianEnsemble drift_shifted_ensemble(const BrownianEnsemble& ens, const AdaptedProcess& phi);

}  // namespace bsdelab
