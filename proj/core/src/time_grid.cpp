#include "bsdelab/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bsdelab/errors.hpp"

namespace bsdelab {

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw DomainError("TimeGrid: need at least two nodes");
  if (nodes_.front() != 0.0) throw DomainError("TimeGrid: first node must be 0");
  for (double v : nodes_)
    if (!std::isfinite(v)) throw DomainError("TimeGrid: non-finite node");
  const double horizon = nodes_.back();
  if (!(horizon > 0.0)) throw DomainError("TimeGrid: horizon must be positive");
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    if (!(nodes_[i + 1] - nodes_[i] > 1e-12 * horizon))
      throw DomainError("TimeGrid: degenerate step at index " + std::to_string(i));
  }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
  if (steps == 0) throw DomainError("TimeGrid::uniform: steps must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw DomainError("TimeGrid::uniform: horizon must be positive and finite");
  std::vector<double> nodes(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    nodes[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
  nodes[0] = 0.0;
  nodes[steps] = horizon;
  return TimeGrid(std::move(nodes));
}

double TimeGrid::max_dt() const {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) m = std::max(m, nodes_[i + 1] - nodes_[i]);
  return m;
}

TimeGrid TimeGrid::refined_halving() const {
  std::vector<double> out;
  out.reserve(2 * nodes_.size() - 1);
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    out.push_back(nodes_[i]);
    out.push_back(0.5 * (nodes_[i] + nodes_[i + 1]));
  }
  out.push_back(nodes_.back());
  return TimeGrid(std::move(out));
}

}  // namespace bsdelab
