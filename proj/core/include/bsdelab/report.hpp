#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bsdelab {

struct Metric {
  std::string name;
  double value = 0.0;
  double stderr_of_mean = 0.0;  // 0 when not a Monte Carlo estimate
};

/// One experiment's machine-readable outcome. Everything here is
/// deterministic for a fixed config; the wall-clock timestamp is added only
/// at serialization time and lives in a single top-level field, so reports
/// can be diffed by dropping that one key.
struct ExperimentReport {
  std::string experiment;
  std::string verdict;  // PASS | FAIL | INFO
  std::string config_hash;
  std::string resolved_config_json;  // full config, defaults included
  std::string inputs_digest;         // seed/grid/paths/basis fingerprint
  std::vector<Metric> metrics;
  std::map<std::string, std::string> notes;
  std::vector<std::string> artifacts;  // file names written next to the report

  const Metric* find(const std::string& name) const;
  void add(const std::string& name, double value, double se = 0.0);
};

std::string report_to_json(const ExperimentReport& rep, bool with_timestamp);

/// Writes report.json (timestamped) and metrics.csv into dir; returns the
/// report path. Creates the directory if needed.
std::string write_report(const ExperimentReport& rep, const std::string& dir);

/// name,value,stderr rows.
std::string metrics_to_csv(const ExperimentReport& rep);

/// Two-column helper for series artifacts (x plus named columns).
void write_series_csv(const std::string& path, const std::string& x_name,
                      std::span<const double> x,
                      const std::vector<std::pair<std::string, std::vector<double>>>& cols);

}  // namespace bsdelab
