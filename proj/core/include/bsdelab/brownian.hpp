#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bsdelab/time_grid.hpp"

namespace bsdelab {

/// Monte Carlo ensemble of d-dimensional Brownian increments on a grid,
/// stored flat as [path][step][dim]. Increments are counter-generated from
/// (seed, path, step, dim), so generate() is a pure function: the same
/// arguments always reproduce the same bits, on any machine partitioning.
class BrownianEnsemble {
 public:
  static constexpr std::size_t kDefaultBudgetDoubles = std::size_t{1} << 28;  // ~2 GiB

  static BrownianEnsemble generate(TimeGrid grid, std::size_t dim, std::size_t n_paths,
                                   std::uint64_t seed,
                                   std::size_t budget_doubles = kDefaultBudgetDoubles);

  /// Wraps externally produced increments (drift shifts, bridge refinements).
  /// Such an ensemble is not regenerable from its seed; `derived` marks that.
  static BrownianEnsemble from_increments(TimeGrid grid, std::size_t dim, std::size_t n_paths,
                                          std::uint64_t seed, std::vector<double> increments,
                                          bool derived = true);

  double increment(std::size_t path, std::size_t step, std::size_t dim) const noexcept {
    return increments_[(path * grid_.steps() + step) * dim_ + dim];
  }

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t n_paths() const noexcept { return n_paths_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool derived() const noexcept { return derived_; }
  const std::vector<double>& raw() const noexcept { return increments_; }

  /// W_T components for one path (sum of increments in step order).
  std::vector<double> terminal_level(std::size_t path) const;

  std::string digest() const;

 private:
  BrownianEnsemble(TimeGrid grid, std::size_t dim, std::size_t n_paths, std::uint64_t seed,
                   std::vector<double> increments, bool derived)
      : grid_(std::move(grid)),
        dim_(dim),
        n_paths_(n_paths),
        seed_(seed),
        derived_(derived),
        increments_(std::move(increments)) {}

  TimeGrid grid_;
  std::size_t dim_;
  std::size_t n_paths_;
  std::uint64_t seed_;
  bool derived_;
  std::vector<double> increments_;
};

/// Brownian levels W_{t_i} at every node, flat [path][node][dim].
/// Node 0 is identically zero; node i is the running sum of the first i
/// increments, accumulated in step order.
struct BrownianLevels {
  std::size_t n_paths = 0;
  std::size_t n_nodes = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  static BrownianLevels from(const BrownianEnsemble& ens);

  double at(std::size_t path, std::size_t node, std::size_t k) const noexcept {
    return values[(path * n_nodes + node) * dim + k];
  }
  const double* row(std::size_t path, std::size_t node) const noexcept {
    return values.data() + (path * n_nodes + node) * dim;
  }
};

/// Halves every step of the source ensemble by Brownian-bridge insertion.
/// Node values of the original grid are preserved exactly: each coarse
/// increment is split into two halves that sum to it bitwise.
BrownianEnsemble refine_halving(const BrownianEnsemble& ens);

/// "path,step,dim,increment" rows; the interchange format for diffing
/// ensembles across implementations.
void dump_increments_csv(const BrownianEnsemble& ens, std::ostream& os);

}  // namespace bsdelab
