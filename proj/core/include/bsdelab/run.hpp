#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bsdelab/config.hpp"
#include "bsdelab/report.hpp"

namespace bsdelab {

/// Exit code contract:
///   0  experiment ran and every verdict is PASS
///   1  infrastructure failure (I/O, config, numerics plumbing)
///   2  hypothesis violation / subcritical regime / admissibility refusal
///   3  experiment ran cleanly but a verdict is FAIL
inline constexpr int kExitPass = 0;
inline constexpr int kExitInfra = 1;
inline constexpr int kExitHypothesis = 2;
inline constexpr int kExitVerdictFail = 3;

struct RunResult {
  int exit_code = kExitPass;
  ExperimentReport report;
  std::string report_path;  // empty when no output_dir configured
};

/// Dispatches a parsed config to its experiment, stamps config hash and
/// resolved config into the report, writes report.json/metrics.csv when an
/// output dir is set. Typed domain errors propagate to the caller.
RunResult run_experiment(const ExperimentConfig& cfg);

/// The whole CLI path: overrides, parse, run, error mapping to exit codes,
/// human-readable summary on `log`.
int run_config_text(const std::string& json_text, const std::vector<std::string>& overrides,
                    std::ostream& log);

}  // namespace bsdelab
