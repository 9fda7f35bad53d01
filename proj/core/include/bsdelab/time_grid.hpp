#pragma once

#include <cstddef>
#include <vector>

namespace bsdelab {

/// Deterministic partition 0 = t_0 < t_1 < ... < t_M = T.
/// Construction rejects grids with fewer than two nodes, a first node other
/// than 0, or any step below 1e-12 * T (degenerate steps would poison the
/// 1/dt factors in the regression targets).
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> nodes);

  static TimeGrid uniform(double horizon, std::size_t steps);

  std::size_t steps() const noexcept { return nodes_.size() - 1; }
  double node(std::size_t i) const { return nodes_.at(i); }
  double dt(std::size_t i) const { return nodes_.at(i + 1) - nodes_.at(i); }
  double horizon() const noexcept { return nodes_.back(); }
  double max_dt() const;
  const std::vector<double>& nodes() const noexcept { return nodes_; }

  /// New grid with a midpoint inserted into every step.
  TimeGrid refined_halving() const;

  bool operator==(const TimeGrid& other) const noexcept { return nodes_ == other.nodes_; }

 private:
  std::vector<double> nodes_;
};

}  // namespace bsdelab
