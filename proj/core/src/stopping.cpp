#include "bsdelab/stopping.hpp"

#include <algorithm>
#include <cmath>

#include "bsdelab/errors.hpp"

namespace bsdelab {

StoppingRule stop_at_node(std::size_t node) {
  StoppingRule r;
  r.name = "node_" + std::to_string(node);
  r.node_of = [node](const SolutionEnsemble& sol, std::size_t) {
    return std::min(node, sol.n_nodes - 1);
  };
  return r;
}

StoppingRule stop_on_level(double level) {
  if (!(level > 0.0)) throw DomainError("stop_on_level: level must be positive");
  StoppingRule r;
  r.name = "hit_" + std::to_string(level);
  r.node_of = [level](const SolutionEnsemble& sol, std::size_t path) {
    for (std::size_t i = 0; i < sol.n_nodes; ++i)
      if (std::abs(sol.y_at(path, i)) >= level) return i;
    return sol.n_nodes - 1;
  };
  return r;
}

std::vector<StoppingRule> default_stopping_family(std::size_t n_nodes,
                                                  std::vector<double> levels) {
  std::vector<StoppingRule> fam;
  for (std::size_t q = 0; q <= 4; ++q) fam.push_back(stop_at_node(q * (n_nodes - 1) / 4));
  for (double lv : levels) fam.push_back(stop_on_level(lv));
  return fam;
}

std::vector<std::size_t> materialize(const StoppingRule& rule, const SolutionEnsemble& sol) {
  std::vector<std::size_t> nodes(sol.n_paths);
  for (std::size_t p = 0; p < sol.n_paths; ++p) {
    nodes[p] = rule.node_of(sol, p);
    if (nodes[p] >= sol.n_nodes) throw DomainError("stopping rule left the grid");
  }
  return nodes;
}

}  // namespace bsdelab
