#include "bsdelab/report.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "bsdelab/errors.hpp"

namespace bsdelab {

using nlohmann::json;

const Metric* ExperimentReport::find(const std::string& name) const {
  for (const auto& m : metrics)
    if (m.name == name) return &m;
  return nullptr;
}

void ExperimentReport::add(const std::string& name, double value, double se) {
  metrics.push_back(Metric{name, value, se});
}

std::string report_to_json(const ExperimentReport& rep, bool with_timestamp) {
  json j;
  j["experiment"] = rep.experiment;
  j["verdict"] = rep.verdict;
  j["config_hash"] = rep.config_hash;
  j["inputs_digest"] = rep.inputs_digest;
  j["config"] = rep.resolved_config_json.empty() ? json::object()
                                                 : json::parse(rep.resolved_config_json);
  json metrics = json::array();
  for (const auto& m : rep.metrics) {
    json mj;
    mj["name"] = m.name;
    mj["value"] = m.value;
    mj["stderr"] = m.stderr_of_mean;
    metrics.push_back(mj);
  }
  j["metrics"] = metrics;
  j["notes"] = rep.notes;
  j["artifacts"] = rep.artifacts;
  if (with_timestamp) {
    const auto now = std::chrono::system_clock::now();
    j["generated_at_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
  }
  return j.dump(2);
}

std::string metrics_to_csv(const ExperimentReport& rep) {
  std::string out = "name,value,stderr\n";
  // json dump gives locale-free shortest-round-trip doubles
  for (const auto& m : rep.metrics)
    out += json(m.name).dump() + "," + json(m.value).dump() + "," +
           json(m.stderr_of_mean).dump() + "\n";
  return out;
}

std::string write_report(const ExperimentReport& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("write_report: cannot create " + dir + ": " + ec.message());
  const std::string path = (fs::path(dir) / "report.json").string();
  {
    std::ofstream os(path);
    if (!os) throw IoError("write_report: cannot open " + path);
    os << report_to_json(rep, true) << '\n';
  }
  {
    const std::string mpath = (fs::path(dir) / "metrics.csv").string();
    std::ofstream os(mpath);
    if (!os) throw IoError("write_report: cannot open " + mpath);
    os << metrics_to_csv(rep);
  }
  return path;
}

void write_series_csv(const std::string& path, const std::string& x_name,
                      std::span<const double> x,
                      const std::vector<std::pair<std::string, std::vector<double>>>& cols) {
  for (const auto& [name, col] : cols)
    if (col.size() != x.size()) throw DimensionError("write_series_csv: ragged columns");
  std::ofstream os(path);
  if (!os) throw IoError("write_series_csv: cannot open " + path);
  os << x_name;
  for (const auto& [name, col] : cols) os << ',' << name;
  os << '\n';
  for (std::size_t i = 0; i < x.size(); ++i) {
    os << json(x[i]).dump();
    for (const auto& [name, col] : cols) os << ',' << json(col[i]).dump();
    os << '\n';
  }
}

}  // namespace bsdelab
