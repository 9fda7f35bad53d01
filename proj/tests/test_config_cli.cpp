// Config parsing, overrides, hashing, and the library-level CLI path.
#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsdelab/config.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/run.hpp"

using namespace bsdelab;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kAllKinds = {"psi-check",  "solve",      "price",
                                            "admissibility", "uniqueness", "comparison",
                                            "stability",     "class-d",    "apriori"};

}  // namespace

TEST_CASE("defaults materialize for every kind and round-trip") {
  for (const std::string& kind : kAllKinds) {
    CAPTURE(kind);
    const std::string text = default_config_json(kind);
    const ExperimentConfig cfg = parse_config(text);
    CHECK(cfg.kind == kind);
    CHECK(!cfg.hash.empty());
    // resolving the resolved form is a fixed point
    CHECK(cfg.resolved_json == text);
    CHECK(parse_config(cfg.resolved_json).hash == cfg.hash);
  }
  CHECK_THROWS_AS(default_config_json("heat-equation"), ConfigError);
}

TEST_CASE("parsed defaults match the declared ones") {
  const ExperimentConfig cfg = parse_config(default_config_json("solve"));
  CHECK(cfg.horizon == 1.0);
  CHECK(cfg.steps == 50);
  CHECK(cfg.paths == 20000);
  CHECK(cfg.dim == 1);
  CHECK(cfg.seed == 7);
  CHECK(cfg.mu == 2.0);
  CHECK(cfg.b == -1.0);
  CHECK(cfg.generator.name == "linear");
  CHECK(cfg.terminal.name == "bounded_sin");
  CHECK(cfg.solve_scheme == "backward_euler");
  CHECK(cfg.tol.comparison == 2e-3);
  CHECK(cfg.output_dir.empty());

  // comparison defaults keep the required ordering xi <= xi'
  const ExperimentConfig cmp = parse_config(default_config_json("comparison"));
  CHECK(cmp.terminal.name == "bounded_sin_shift");
  CHECK(cmp.terminal.params.at("delta") == -0.2);
  CHECK(cmp.terminal_prime.name == "bounded_sin");
  CHECK(cmp.generator_prime.name == cmp.generator.name);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"experiment":"solve","grid":{"horizon":1.0,"stepz":10}})"),
      "config: /grid/stepz: unknown key", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"experiment":"solve","gridd":{}})"),
                       "config: /gridd: unknown key", ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("config validation catches out-of-range values") {
  auto with = [](const std::string& body) {
    return std::string(R"({"experiment":"solve",)") + body + "}";
  };
  CHECK_THROWS_AS(parse_config(R"({"experiment":"pde"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(with(R"("grid":{"steps":0})")), ConfigError);
  CHECK_THROWS_AS(parse_config(with(R"("grid":{"horizon":-1.0})")), ConfigError);
  CHECK_THROWS_AS(parse_config(with(R"("ensemble":{"paths":1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(with(R"("ensemble":{"dim":17})")), ConfigError);
  CHECK_THROWS_AS(parse_config(with(R"("psi":{"mu":0.0})")), ConfigError);
  CHECK_THROWS_AS(parse_config(with(R"("solver":{"damping":0.0})")), ConfigError);
  CHECK_THROWS_AS(parse_config(with(R"("basis":{"degree":9})")), ConfigError);
  CHECK_THROWS_AS(parse_config(with(R"("basis":{"ridge":-1e-8})")), ConfigError);
  CHECK_THROWS_AS(
      parse_config(R"({"experiment":"comparison","comparison":{"mode":"soft"}})"),
      ConfigError);
}

TEST_CASE("the hash ignores the output directory only") {
  const std::string base = default_config_json("solve");
  const ExperimentConfig plain = parse_config(base);

  const ExperimentConfig redirected =
      parse_config(apply_overrides(base, {"output_dir=/tmp/elsewhere"}));
  CHECK(redirected.output_dir == "/tmp/elsewhere");
  CHECK(redirected.hash == plain.hash);
  CHECK(redirected.resolved_json != plain.resolved_json);

  const ExperimentConfig reseeded = parse_config(apply_overrides(base, {"ensemble.seed=8"}));
  CHECK(reseeded.hash != plain.hash);
}

TEST_CASE("overrides parse JSON literals with bare-string fallback") {
  const std::string text = apply_overrides(
      default_config_json("solve"),
      {"grid.steps=12", "solver.clip_predictions=true", "terminal.name=abs_sin",
       "psi.mu=1.5", "solve.scheme=picard", "generator.params.a=-2.5"});
  const ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.steps == 12);
  CHECK(cfg.clip_predictions == true);
  CHECK(cfg.terminal.name == "abs_sin");  // unquoted strings fall back
  CHECK(cfg.mu == 1.5);
  CHECK(cfg.solve_scheme == "picard");
  CHECK(cfg.generator.params.at("a") == -2.5);

  const ExperimentConfig ladder = parse_config(
      apply_overrides(default_config_json("class-d"), {"classd.k_ladder=[1,2,4]"}));
  CHECK(ladder.classd_ladder == std::vector<double>{1.0, 2.0, 4.0});

  CHECK_THROWS_AS(apply_overrides("{}", {"no-equals-sign"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides("{}", {"=5"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(default_config_json("solve"), {"grid.horizon.x=3"}),
                  ConfigError);

  // an override may inject an unknown key; the parse still catches it
  const std::string typo = apply_overrides(default_config_json("solve"), {"grid.stepz=5"});
  CHECK_THROWS_AS(parse_config(typo), ConfigError);
}

TEST_CASE("run_experiment stamps config identity into the report") {
  const ExperimentConfig cfg = parse_config(
      apply_overrides(default_config_json("psi-check"), {"psi_check.samples=2000"}));
  const RunResult res = run_experiment(cfg);
  CHECK(res.exit_code == kExitPass);
  CHECK(res.report_path.empty());
  CHECK(res.report.config_hash == cfg.hash);
  CHECK(res.report.resolved_config_json == cfg.resolved_json);

  const nlohmann::json j = nlohmann::json::parse(report_to_json(res.report, false));
  CHECK(j["config"]["experiment"] == "psi-check");
  CHECK(j["config_hash"] == cfg.hash);
}

TEST_CASE("run_config_text maps outcomes to exit codes") {
  std::ostringstream log;

  // 0: clean PASS, report written where asked
  const fs::path dir = fs::temp_directory_path() / "bsdelab_cli_run";
  fs::remove_all(dir);
  const int pass = run_config_text(
      default_config_json("psi-check"),
      {"psi_check.samples=2000", "output_dir=" + dir.string()}, log);
  CHECK(pass == kExitPass);
  CHECK(log.str().find("psi-check: PASS") != std::string::npos);
  CHECK(log.str().find("report: ") != std::string::npos);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "metrics.csv"));
  fs::remove_all(dir);

  // 1: infrastructure (malformed config)
  log.str("");
  CHECK(run_config_text("{not json", {}, log) == kExitInfra);
  CHECK(log.str().find("error:") != std::string::npos);
  log.str("");
  CHECK(run_config_text(R"({"experiment":"solve","grid":{"stepz":1}})", {}, log) == kExitInfra);

  // 2: typed refusal (subcritical exponent)
  log.str("");
  const int refused = run_config_text(
      default_config_json("apriori"),
      {"psi.mu=0.2", "psi.b=0.5", "ensemble.paths=2000", "grid.steps=5"}, log);
  CHECK(refused == kExitHypothesis);
  CHECK(log.str().find("abort (subcritical)") != std::string::npos);

  // 3: ran cleanly, verdict FAIL (terminal outside the integrability class)
  log.str("");
  const int failed = run_config_text(
      default_config_json("class-d"),
      {"terminal.name=exp_wt_squared", "ensemble.paths=2000", "grid.steps=10",
       "solver.check_samples=1000"},
      log);
  CHECK(failed == kExitVerdictFail);
  CHECK(log.str().find("class-d: FAIL") != std::string::npos);
}

TEST_CASE("run_config_text executes a scaled-down solve") {
  std::ostringstream log;
  const int code = run_config_text(
      default_config_json("solve"),
      {"ensemble.paths=2000", "grid.steps=10", "solver.check_samples=1000"}, log);
  CHECK(code == kExitPass);
  CHECK(log.str().find("solve: PASS") != std::string::npos);
  CHECK(log.str().find("y0 = ") != std::string::npos);
}
