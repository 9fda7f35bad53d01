#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "bsdelab/solver.hpp"

namespace bsdelab {

/// A stopping rule materializes to one node index per path. Rules may only
/// look at the path up to the chosen node (first-hitting rules do this by
/// construction); deterministic-time rules ignore the path entirely.
struct StoppingRule {
  std::string name;
  std::function<std::size_t(const SolutionEnsemble& sol, std::size_t path)> node_of;
};

StoppingRule stop_at_node(std::size_t node);

/// First node where |Y| >= level, else the last node.
StoppingRule stop_on_level(double level);

/// Deterministic ladder (quartile nodes) plus first-hitting rules at the
/// given |Y| levels: the family used by the class (D) style diagnostics.
std::vector<StoppingRule> default_stopping_family(std::size_t n_nodes,
                                                  std::vector<double> levels = {0.5, 1.0, 2.0});

std::vector<std::size_t> materialize(const StoppingRule& rule, const SolutionEnsemble& sol);

}  // namespace bsdelab
