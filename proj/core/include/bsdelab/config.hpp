#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsdelab/builtins.hpp"
#include "bsdelab/harness.hpp"

namespace bsdelab {

struct NamedSpec {
  std::string name;
  ParamMap params;
};

/// Fully resolved experiment description. Parsing materializes every
/// default, rejects unknown keys (a typo must never silently become a
/// default), and freezes the canonical JSON + its hash. The hash excludes
/// output_dir: where a run writes does not change what it computes.
struct ExperimentConfig {
  std::string kind;  // psi-check | solve | price | admissibility | uniqueness
                     // | comparison | stability | class-d | apriori

  double horizon = 1.0;
  std::size_t steps = 50;
  std::size_t paths = 20000;
  std::size_t dim = 1;
  std::uint64_t seed = 7;

  double mu = 2.0;
  double b = -1.0;  // negative = inherit the generator's declared constant

  NamedSpec generator{"linear", {}};
  NamedSpec terminal{"bounded_sin", {}};
  BasisSpec basis;

  double damping = 0.5;
  std::size_t max_inner = 50;
  double inner_tol = 1e-12;
  bool clip_predictions = false;
  bool declaration_checks = true;
  std::size_t check_samples = 4000;
  std::size_t picard_sweeps = 30;
  double picard_tol = 1e-6;
  std::size_t picard_slice = 0;

  Tolerances tol;
  std::string output_dir;

  // per-kind extras
  BasisSpec basis2{4, 1e-8};
  std::string comparison_mode = "lipschitz";
  double probe_delta = 0.01;
  NamedSpec generator_prime{"", {}};
  NamedSpec terminal_prime{"", {}};
  double stab_l0 = 1.0;
  std::vector<double> stab_n_values = {1, 2, 4, 8, 16};
  std::vector<double> stab_betas = {0.5, 0.9};
  NamedSpec stab_eta{"abs_sin", {}};
  std::vector<double> classd_ladder = {0.5, 1, 2, 4, 8, 16, 32};
  double admissibility_threshold = 0.2;
  bool price_override = false;
  std::string solve_scheme = "backward_euler";
  bool dump_solution = false;
  std::size_t psi_check_samples = 100000;

  std::string resolved_json;  // canonical, defaults included
  std::string hash;           // fnv1a of resolved_json minus output_dir
};

ExperimentConfig parse_config(const std::string& json_text);

/// Resolved JSON for a kind with everything defaulted (a valid config).
std::string default_config_json(const std::string& kind);

/// Applies "a.b.c=<json literal>" style overrides to raw config text.
/// Values parse as JSON first, falling back to string. Paths must exist in
/// the schema (validated by the subsequent parse).
std::string apply_overrides(const std::string& json_text,
                            const std::vector<std::string>& overrides);

}  // namespace bsdelab
