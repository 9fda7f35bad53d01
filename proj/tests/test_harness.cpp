// Experiment harness: verdicts, metric sets, refusal paths, artifacts.
// Scales are deliberately small (M=10..16, n=2000..4000); anything asserted
// against a numeric target here has a comfortable noise margin at that size.
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsdelab/builtins.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/harness.hpp"

using namespace bsdelab;
namespace fs = std::filesystem;

namespace {

HarnessInputs small_inputs(std::size_t steps = 16, std::size_t n_paths = 4000) {
  HarnessInputs in;
  in.grid = TimeGrid::uniform(1.0, steps);
  in.n_paths = n_paths;
  in.seed = 7;
  in.solver.check_samples = 2000;
  in.solver.picard_max_sweeps = 60;  // whole-horizon sweeps need headroom
  return in;
}

// the canonical contraction: f = -y + 0.5 z, xi = sin(W_T)
BsdeProblem contraction_problem() {
  return {make_generator("linear", {{"a", -1.0}, {"b", 0.5}, {"c", 0.0}}),
          make_terminal("bounded_sin")};
}

double metric(const ExperimentReport& rep, const std::string& name) {
  const Metric* m = rep.find(name);
  REQUIRE_MESSAGE(m != nullptr, "missing metric: " << name);
  return m->value;
}

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / leaf;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("psi inequality sweep is clean") {
  const ExperimentReport rep = psi_inequality_experiment(2.0, 20000, 7);
  CHECK(rep.experiment == "psi-check");
  CHECK(rep.verdict == "PASS");
  CHECK(metric(rep, "violations_product") == 0.0);
  CHECK(metric(rep, "violations_convexity") == 0.0);
  CHECK(metric(rep, "violations_scaling") == 0.0);
  CHECK(metric(rep, "samples_per_inequality") == 20000.0);
  // margins are measured against the strictly negative floor
  CHECK(metric(rep, "min_margin_product") > 0.0);
  CHECK(metric(rep, "min_margin_convexity") > 0.0);
  CHECK(metric(rep, "min_margin_scaling") > 0.0);
}

TEST_CASE("uniqueness gap fits the noise budget") {
  auto in = small_inputs();
  const auto dir = fresh_dir("bsdelab_uniq_art");
  in.out_dir = dir.string();
  BasisSpec basis2;
  basis2.degree = 4;

  const ExperimentReport rep =
      uniqueness_experiment(contraction_problem(), in, basis2, Tolerances{});
  CHECK(rep.verdict == "PASS");

  const double budget = 0.35 * (1.0 / 16.0) + 6.0 / std::sqrt(4000.0);
  CHECK(metric(rep, "tolerance") == doctest::Approx(budget).epsilon(1e-12));
  CHECK(metric(rep, "U") <= budget);
  CHECK(metric(rep, "U") >= 0.0);

  // all scheme/basis pairs reported
  std::size_t gaps = 0;
  for (const auto& m : rep.metrics)
    if (m.name.rfind("gap[", 0) == 0) ++gaps;
  CHECK(gaps == 4 * 3 / 2);

  const std::string lbl = "be/" + in.solver.basis.describe();
  CHECK(metric(rep, "y0[" + lbl + "]") == doctest::Approx(0.1069742972).epsilon(0.5));
  CHECK(rep.notes.count(lbl) == 1);
  CHECK(rep.notes.count("digest:picard/" + basis2.describe()) == 1);

  REQUIRE(rep.artifacts.size() == 1);
  CHECK(rep.artifacts[0] == "uniqueness_gap.csv");
  CHECK(fs::exists(dir / "uniqueness_gap.csv"));
  fs::remove_all(dir);
}

TEST_CASE("comparison orders shifted terminals") {
  auto in = small_inputs();
  const auto dir = fresh_dir("bsdelab_cmp_art");
  in.out_dir = dir.string();
  const BsdeProblem base = contraction_problem();
  const BsdeProblem primed{make_generator("linear", {{"a", -1.0}, {"b", 0.5}, {"c", 0.0}}),
                           make_terminal("bounded_sin_shift", {{"delta", 0.2}})};

  const ExperimentReport rep =
      comparison_experiment(base, primed, ComparisonMode::lipschitz, in, Tolerances{}, 0.2);
  CHECK(rep.verdict == "PASS");
  CHECK(metric(rep, "V") <= 2e-3);
  // d(Y' - Y) is a linear BSDE gap: 0.2 e^{-(T-t)} at a = -1
  CHECK(metric(rep, "mean_gap_at_0") == doctest::Approx(0.2 * std::exp(-1.0)).epsilon(0.15));

  // the gap at the midpoint is ~0.121 < 0.2, so every path is probed
  CHECK(metric(rep, "probe_count") == 4000.0);
  CHECK(metric(rep, "probe_mean_gap@node16") == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(metric(rep, "probe_mean_gap@node12") ==
        doctest::Approx(0.2 * std::exp(-0.25)).epsilon(0.15));

  REQUIRE(rep.artifacts.size() == 1);
  CHECK(fs::exists(dir / "comparison_gap.csv"));
  fs::remove_all(dir);
}

TEST_CASE("comparison is exact on identical problems") {
  const auto in = small_inputs();
  const ExperimentReport rep = comparison_experiment(
      contraction_problem(), contraction_problem(), ComparisonMode::lipschitz, in, Tolerances{});
  CHECK(rep.verdict == "PASS");
  // same ensemble, same options: the two solves are bitwise identical
  CHECK(metric(rep, "V") == 0.0);
  CHECK(metric(rep, "mean_gap_at_0") == 0.0);
  CHECK(metric(rep, "probe_count") == 4000.0);
  CHECK(metric(rep, "probe_mean_gap@node8") == 0.0);
}

TEST_CASE("comparison refuses ordering violations") {
  const auto in = small_inputs(10, 2000);
  const BsdeProblem base = contraction_problem();

  // terminal ordering broken: xi' = xi - 0.2
  const BsdeProblem lower_terminal{
      make_generator("linear", {{"a", -1.0}, {"b", 0.5}, {"c", 0.0}}),
      make_terminal("bounded_sin_shift", {{"delta", -0.2}})};
  CHECK_THROWS_AS(comparison_experiment(base, lower_terminal, ComparisonMode::lipschitz, in,
                                        Tolerances{}),
                  HypothesisViolationError);

  // driver ordering broken: f = f' + 0.2 along any trajectory
  const BsdeProblem richer_driver{
      make_generator("linear", {{"a", -1.0}, {"b", 0.5}, {"c", 0.2}}),
      make_terminal("bounded_sin")};
  const BsdeProblem plain{make_generator("linear", {{"a", -1.0}, {"b", 0.5}, {"c", 0.0}}),
                          make_terminal("bounded_sin")};
  CHECK_THROWS_AS(comparison_experiment(richer_driver, plain, ComparisonMode::lipschitz, in,
                                        Tolerances{}),
                  HypothesisViolationError);
}

TEST_CASE("comparison modes require the declared structure") {
  const auto in = small_inputs(10, 2000);

  // linear declares no Osgood modulus
  CHECK_THROWS_AS(comparison_experiment(contraction_problem(), contraction_problem(),
                                        ComparisonMode::osgood, in, Tolerances{}),
                  HypothesisViolationError);

  // sqrt_abs declares no y-Lipschitz constant
  const BsdeProblem rough{make_generator("sqrt_abs"), make_terminal("bounded_sin")};
  CHECK_THROWS_AS(comparison_experiment(rough, rough, ComparisonMode::lipschitz, in, Tolerances{}),
                  HypothesisViolationError);

  // cubic_decay does declare one; osgood mode runs and has no probe metrics
  const BsdeProblem soft{make_generator("cubic_decay"), make_terminal("bounded_sin")};
  const BsdeProblem soft_up{make_generator("cubic_decay"),
                            make_terminal("bounded_sin_shift", {{"delta", 0.2}})};
  const ExperimentReport rep =
      comparison_experiment(soft, soft_up, ComparisonMode::osgood, in, Tolerances{});
  CHECK(rep.verdict == "PASS");
  CHECK(metric(rep, "V") <= 2e-3);
  CHECK(rep.find("probe_count") == nullptr);
}

TEST_CASE("stability ladder contracts on the canonical case") {
  auto in = small_inputs();
  const auto dir = fresh_dir("bsdelab_stab_art");
  in.out_dir = dir.string();
  StabilityLadder ladder;
  ladder.eta = make_terminal("abs_sin");

  const ExperimentReport rep =
      stability_experiment(contraction_problem(), ladder, in, Tolerances{});
  CHECK(rep.verdict == "PASS");
  CHECK(metric(rep, "S1_final") <= 0.13);
  CHECK(metric(rep, "S1_final") == metric(rep, "S1@n16"));
  CHECK(metric(rep, "S1@n1") > metric(rep, "S1@n16"));
  CHECK(metric(rep, "S3@n16") > 0.0);
  CHECK(metric(rep, "S2_beta0.5@n16") > 0.0);
  CHECK(metric(rep, "S2_beta0.9@n1") > metric(rep, "S2_beta0.9@n16"));
  CHECK(metric(rep, "tolerance") == 0.13);
  CHECK(rep.notes.at("envelope").find("ADMISSIBLE") != std::string::npos);

  REQUIRE(rep.artifacts.size() == 1);
  CHECK(fs::exists(dir / "stability_series.csv"));
  fs::remove_all(dir);
}

TEST_CASE("stability is exactly zero under trivial coupling") {
  const auto in = small_inputs();
  StabilityLadder ladder;
  ladder.l0 = 0.0;
  ladder.eta = make_terminal("constant", {{"c", 0.0}});

  // every rung solves the identical problem on the identical ensemble
  const ExperimentReport rep =
      stability_experiment(contraction_problem(), ladder, in, Tolerances{});
  CHECK(rep.verdict == "PASS");
  CHECK(metric(rep, "S1_final") == 0.0);
  CHECK(metric(rep, "S1@n1") == 0.0);
  CHECK(metric(rep, "S3@n16") == 0.0);
  CHECK(metric(rep, "S2_beta0.5@n1") == 0.0);
}

TEST_CASE("stability validates the ladder and the envelope") {
  const auto in = small_inputs(10, 2000);
  StabilityLadder ladder;
  ladder.eta = make_terminal("abs_sin");

  ladder.n_values = {};
  CHECK_THROWS_AS(stability_experiment(contraction_problem(), ladder, in, Tolerances{}),
                  ConfigError);
  ladder.n_values = {1.0, -2.0};
  CHECK_THROWS_AS(stability_experiment(contraction_problem(), ladder, in, Tolerances{}),
                  ConfigError);

  // an envelope that fails the integrability gate aborts the experiment
  ladder.n_values = {1.0, 2.0};
  ladder.eta = make_terminal("exp_wt_squared");
  CHECK_THROWS_AS(stability_experiment(contraction_problem(), ladder, in, Tolerances{}),
                  HypothesisViolationError);
}

TEST_CASE("class-d tails vanish for a bounded solution") {
  auto in = small_inputs();
  const auto dir = fresh_dir("bsdelab_classd_art");
  in.out_dir = dir.string();
  const std::vector<double> ladder = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0};

  const ExperimentReport rep =
      class_d_experiment(contraction_problem(), in, ladder, Tolerances{});
  CHECK(rep.verdict == "PASS");
  CHECK(metric(rep, "tail_final") == metric(rep, "tail@K32"));
  CHECK(metric(rep, "tail_final") < 0.05);
  CHECK(metric(rep, "tail@K0.5") >= metric(rep, "tail@K32"));
  CHECK(metric(rep, "epsilon") == 0.05);
  CHECK(rep.notes.at("stopping_rules").find("rules") != std::string::npos);

  REQUIRE(rep.artifacts.size() == 1);
  CHECK(fs::exists(dir / "classd_tails.csv"));
  fs::remove_all(dir);
}

TEST_CASE("class-d flags a terminal outside the integrability class") {
  const auto in = small_inputs(10, 2000);
  const BsdeProblem heavy{make_generator("zero"), make_terminal("exp_wt_squared")};
  const ExperimentReport rep =
      class_d_experiment(heavy, in, {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}, Tolerances{});
  CHECK(rep.verdict == "FAIL");
  CHECK(metric(rep, "tail_final") > 0.05);
}

TEST_CASE("class-d validates the cutoff ladder") {
  const auto in = small_inputs(10, 2000);
  CHECK_THROWS_AS(class_d_experiment(contraction_problem(), in, {}, Tolerances{}), ConfigError);
  CHECK_THROWS_AS(class_d_experiment(contraction_problem(), in, {2.0, 1.0}, Tolerances{}),
                  ConfigError);
  CHECK_THROWS_AS(class_d_experiment(contraction_problem(), in, {1.0, 1.0}, Tolerances{}),
                  ConfigError);
}

TEST_CASE("a-priori bound audit passes a contraction") {
  const auto in = small_inputs(10, 2000);
  const ExperimentReport rep =
      apriori_bound_experiment(contraction_problem(), in, Tolerances{});
  CHECK(rep.verdict == "PASS");
  CHECK(metric(rep, "violation_fraction") <= 0.01);
  CHECK(metric(rep, "violation_threshold") == 0.01);
  CHECK(metric(rep, "fit_A") >= 0.0);
  CHECK(metric(rep, "fit_B") >= 0.0);
  CHECK(metric(rep, "fit_rmse") >= 0.0);
  CHECK(metric(rep, "bound_at_0_mean") > 1.0);
}

TEST_CASE("a-priori audit aborts below the critical exponent") {
  auto in = small_inputs(10, 2000);
  in.params = PsiParams{0.2, 0.5, 1.0};  // mu <= b sqrt(T)
  CHECK_THROWS_AS(apriori_bound_experiment(contraction_problem(), in, Tolerances{}),
                  SubcriticalError);
}

TEST_CASE("solve experiment reports scheme metadata") {
  const auto in = small_inputs();

  const ExperimentReport be = solve_experiment(contraction_problem(), in, "backward_euler");
  CHECK(be.verdict == "PASS");
  // frozen affine reference for a=-1, b=0.5, c=0, xi=sin(W_T), T=1
  CHECK(metric(be, "y0") == doctest::Approx(0.106974297208003).epsilon(0.5));
  CHECK(std::abs(metric(be, "y0") - 0.106974297208003) < 0.05);
  CHECK(metric(be, "y0_path_spread") == 0.0);  // node-0 features are constant
  CHECK(metric(be, "fallback_nodes") == 0.0);
  CHECK(metric(be, "inner_iterations") > 0.0);
  CHECK(metric(be, "max_condition_number") > 1e7);
  CHECK(metric(be, "max_condition_number") < 1e14);
  CHECK(be.find("sweeps") == nullptr);
  CHECK(!be.notes.at("solution_digest").empty());
  CHECK(!be.notes.at("ensemble_digest").empty());

  const ExperimentReport pc = solve_experiment(contraction_problem(), in, "picard");
  CHECK(pc.verdict == "PASS");
  CHECK(metric(pc, "converged") == 1.0);
  CHECK(metric(pc, "sweeps") >= 2.0);
  CHECK(std::abs(metric(pc, "y0") - metric(be, "y0")) < 0.02);

  CHECK_THROWS_AS(solve_experiment(contraction_problem(), in, "midpoint"), ConfigError);
}

TEST_CASE("solve experiment dumps the solution surface on request") {
  auto in = small_inputs(4, 100);
  const auto dir = fresh_dir("bsdelab_solve_art");
  in.out_dir = dir.string();
  const ExperimentReport rep = solve_experiment(contraction_problem(), in, "backward_euler", true);
  REQUIRE(rep.artifacts.size() == 1);
  CHECK(rep.artifacts[0] == "solution.csv");

  std::ifstream is(dir / "solution.csv");
  REQUIRE(is.good());
  std::string header;
  std::getline(is, header);
  CHECK(header == "path,node,t,y");
  std::size_t rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 100 * 5);
  fs::remove_all(dir);
}

TEST_CASE("admissibility experiment mirrors the gate") {
  auto in = small_inputs(10, 4000);
  const auto dir = fresh_dir("bsdelab_adm_art");
  in.out_dir = dir.string();

  const ExperimentReport rep =
      admissibility_experiment(make_terminal("bounded_sin"), in, 0.2);
  CHECK(rep.verdict == "PASS");
  CHECK(rep.notes.at("admissibility_verdict") == "ADMISSIBLE");
  CHECK(rep.notes.at("terminal") == "bounded_sin");
  CHECK(metric(rep, "mu") == 2.0);
  CHECK(metric(rep, "b") == 0.3);
  CHECK(metric(rep, "T") == 1.0);
  // E psi(|sin W_1|, 2) = 4.78534033323936
  CHECK(metric(rep, "psi_moment@n") == doctest::Approx(4.78534033323936).epsilon(0.1));
  CHECK(metric(rep, "psi_moment@2n") == doctest::Approx(4.78534033323936).epsilon(0.08));
  CHECK(metric(rep, "ess") > 0.25 * 2.0 * 4000.0);
  CHECK(metric(rep, "bound_rhs") > 100.0 * metric(rep, "psi_moment@2n"));

  REQUIRE(rep.artifacts.size() == 1);
  CHECK(rep.artifacts[0] == "admissibility.json");
  std::ifstream is(dir / "admissibility.json");
  REQUIRE(is.good());
  const nlohmann::json j = nlohmann::json::parse(is);
  CHECK(j.size() == 8);
  for (const char* key : {"mu", "b", "T", "bound_rhs", "psi_moment@n", "psi_moment@2n",
                          "verdict", "ess"})
    CHECK(j.contains(key));
  CHECK(j["verdict"] == "ADMISSIBLE");
  CHECK(j["mu"].get<double>() == 2.0);
  fs::remove_all(dir);

  const ExperimentReport bad =
      admissibility_experiment(make_terminal("exp_wt_squared"), in, 0.2);
  CHECK(bad.verdict == "FAIL");
  CHECK(bad.notes.at("admissibility_verdict") == "UNSTABLE");
}

TEST_CASE("price experiment reconciles the measure change") {
  auto in = small_inputs(12, 20000);
  const ExperimentReport rep =
      price_experiment(contraction_problem(), in, Tolerances{}, false, 0.2);
  CHECK(rep.verdict == "PASS");
  CHECK(rep.notes.at("admissibility_verdict") == "ADMISSIBLE");
  CHECK(metric(rep, "reconstruction_gap") <= 0.02);
  CHECK(metric(rep, "gap_tolerance") == 0.02);
  CHECK(metric(rep, "price_ess") > 0.2 * 20000.0);
  CHECK(std::abs(metric(rep, "y0") - 0.106974297208003) < 0.05);

  const Metric* dens = rep.find("mean_terminal_density");
  REQUIRE(dens != nullptr);
  CHECK(dens->stderr_of_mean > 0.0);
  CHECK(std::abs(dens->value - 1.0) <= 4.0 * dens->stderr_of_mean);
}

TEST_CASE("price experiment refuses an unstable terminal") {
  const auto in = small_inputs(10, 2000);
  const BsdeProblem heavy{make_generator("linear", {{"a", -1.0}, {"b", 0.5}, {"c", 0.0}}),
                          make_terminal("exp_wt_squared")};
  CHECK_THROWS_AS(price_experiment(heavy, in, Tolerances{}, false, 0.2), AdmissibilityError);

  // the override runs to a verdict instead of throwing; it cannot PASS here
  const ExperimentReport rep = price_experiment(heavy, in, Tolerances{}, true, 0.2);
  CHECK(rep.notes.at("admissibility_verdict") == "UNSTABLE");
  CHECK(rep.notes.at("admissibility_override") == "true");
  CHECK(rep.verdict == "FAIL");
}

TEST_CASE("reports serialize deterministically") {
  const ExperimentReport a = psi_inequality_experiment(2.0, 2000, 5);
  const ExperimentReport b = psi_inequality_experiment(2.0, 2000, 5);
  CHECK(report_to_json(a, false) == report_to_json(b, false));
  CHECK(metrics_to_csv(a) == metrics_to_csv(b));

  const nlohmann::json j = nlohmann::json::parse(report_to_json(a, false));
  CHECK(j["experiment"] == "psi-check");
  CHECK(j["verdict"] == "PASS");

  const std::string csv = metrics_to_csv(a);
  CHECK(csv.rfind("name,value,stderr\n", 0) == 0);

  const auto dir = fresh_dir("bsdelab_report_art");
  const std::string path = write_report(a, dir.string());
  CHECK(fs::exists(path));
  CHECK(fs::exists(dir / "metrics.csv"));
  // the timestamped variant still parses
  std::ifstream is(path);
  const nlohmann::json timestamped = nlohmann::json::parse(is);
  CHECK(timestamped.contains("generated_at_unix_ms"));
  fs::remove_all(dir);
}
