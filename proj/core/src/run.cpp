#include "bsdelab/run.hpp"

#include <cmath>
#include <ostream>

#include "bsdelab/errors.hpp"

namespace bsdelab {

namespace {

HarnessInputs make_inputs(const ExperimentConfig& cfg, const GeneratorSpec* f) {
  HarnessInputs in;
  in.grid = TimeGrid::uniform(cfg.horizon, cfg.steps);
  in.dim = cfg.dim;
  in.n_paths = cfg.paths;
  in.seed = cfg.seed;
  const double b = cfg.b >= 0.0 ? cfg.b : (f ? f->lipschitz_z : 0.0);
  in.params = PsiParams(cfg.mu, b, cfg.horizon);
  in.solver.basis = cfg.basis;
  in.solver.damping = cfg.damping;
  in.solver.max_inner = cfg.max_inner;
  in.solver.inner_tol = cfg.inner_tol;
  in.solver.run_declaration_checks = cfg.declaration_checks;
  in.solver.check_samples = cfg.check_samples;
  in.solver.picard_max_sweeps = cfg.picard_sweeps;
  in.solver.picard_tol = cfg.picard_tol;
  in.solver.picard_slice_nodes = cfg.picard_slice;
  if (cfg.clip_predictions) in.solver.clip_params = in.params;
  in.out_dir = cfg.output_dir;
  return in;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  RunResult result;
  ExperimentReport rep;

  if (cfg.kind == "psi-check") {
    rep = psi_inequality_experiment(cfg.mu, cfg.psi_check_samples, cfg.seed);
  } else if (cfg.kind == "admissibility") {
    const TerminalSpec xi = make_terminal(cfg.terminal.name, cfg.terminal.params);
    const GeneratorSpec f = make_generator(cfg.generator.name, cfg.generator.params);
    const HarnessInputs in = make_inputs(cfg, &f);
    rep = admissibility_experiment(xi, in, cfg.admissibility_threshold);
  } else if (cfg.kind == "solve") {
    const GeneratorSpec f = make_generator(cfg.generator.name, cfg.generator.params);
    const TerminalSpec xi = make_terminal(cfg.terminal.name, cfg.terminal.params);
    const HarnessInputs in = make_inputs(cfg, &f);
    rep = solve_experiment(BsdeProblem(f, xi), in, cfg.solve_scheme, cfg.dump_solution);
  } else if (cfg.kind == "price") {
    const GeneratorSpec f = make_generator(cfg.generator.name, cfg.generator.params);
    const TerminalSpec xi = make_terminal(cfg.terminal.name, cfg.terminal.params);
    const HarnessInputs in = make_inputs(cfg, &f);
    rep = price_experiment(BsdeProblem(f, xi), in, cfg.tol, cfg.price_override,
                           cfg.admissibility_threshold);
  } else if (cfg.kind == "uniqueness") {
    const GeneratorSpec f = make_generator(cfg.generator.name, cfg.generator.params);
    const TerminalSpec xi = make_terminal(cfg.terminal.name, cfg.terminal.params);
    const HarnessInputs in = make_inputs(cfg, &f);
    rep = uniqueness_experiment(BsdeProblem(f, xi), in, cfg.basis2, cfg.tol);
  } else if (cfg.kind == "comparison") {
    const GeneratorSpec f = make_generator(cfg.generator.name, cfg.generator.params);
    const TerminalSpec xi = make_terminal(cfg.terminal.name, cfg.terminal.params);
    const GeneratorSpec fp = make_generator(cfg.generator_prime.name, cfg.generator_prime.params);
    const TerminalSpec xip = make_terminal(cfg.terminal_prime.name, cfg.terminal_prime.params);
    const HarnessInputs in = make_inputs(cfg, &f);
    const ComparisonMode mode = cfg.comparison_mode == "lipschitz" ? ComparisonMode::lipschitz
                                                                   : ComparisonMode::osgood;
    rep = comparison_experiment(BsdeProblem(f, xi), BsdeProblem(fp, xip), mode, in, cfg.tol,
                                cfg.probe_delta);
  } else if (cfg.kind == "stability") {
    const GeneratorSpec f = make_generator(cfg.generator.name, cfg.generator.params);
    const TerminalSpec xi = make_terminal(cfg.terminal.name, cfg.terminal.params);
    const HarnessInputs in = make_inputs(cfg, &f);
    StabilityLadder ladder;
    ladder.l0 = cfg.stab_l0;
    ladder.n_values = cfg.stab_n_values;
    ladder.betas = cfg.stab_betas;
    ladder.eta = make_terminal(cfg.stab_eta.name, cfg.stab_eta.params);
    rep = stability_experiment(BsdeProblem(f, xi), ladder, in, cfg.tol);
  } else if (cfg.kind == "class-d") {
    const GeneratorSpec f = make_generator(cfg.generator.name, cfg.generator.params);
    const TerminalSpec xi = make_terminal(cfg.terminal.name, cfg.terminal.params);
    const HarnessInputs in = make_inputs(cfg, &f);
    rep = class_d_experiment(BsdeProblem(f, xi), in, cfg.classd_ladder, cfg.tol);
  } else if (cfg.kind == "apriori") {
    const GeneratorSpec f = make_generator(cfg.generator.name, cfg.generator.params);
    const TerminalSpec xi = make_terminal(cfg.terminal.name, cfg.terminal.params);
    const HarnessInputs in = make_inputs(cfg, &f);
    rep = apriori_bound_experiment(BsdeProblem(f, xi), in, cfg.tol);
  } else {
    throw ConfigError("run_experiment: unknown kind '" + cfg.kind + "'");
  }

  rep.config_hash = cfg.hash;
  rep.resolved_config_json = cfg.resolved_json;
  result.report = rep;
  if (!cfg.output_dir.empty()) result.report_path = write_report(rep, cfg.output_dir);
  result.exit_code = rep.verdict == "FAIL" ? kExitVerdictFail : kExitPass;
  return result;
}

int run_config_text(const std::string& json_text, const std::vector<std::string>& overrides,
                    std::ostream& log) {
  try {
    const std::string effective = apply_overrides(json_text, overrides);
    const ExperimentConfig cfg = parse_config(effective);
    const RunResult res = run_experiment(cfg);
    log << res.report.experiment << ": " << res.report.verdict << " (config " << cfg.hash
        << ")\n";
    for (const auto& m : res.report.metrics) {
      log << "  " << m.name << " = " << m.value;
      if (m.stderr_of_mean != 0.0) log << " +- " << m.stderr_of_mean;
      log << '\n';
    }
    for (const auto& [k, v] : res.report.notes) log << "  # " << k << ": " << v << '\n';
    if (!res.report_path.empty()) log << "report: " << res.report_path << '\n';
    return res.exit_code;
  } catch (const SubcriticalError& e) {
    log << "abort (subcritical): " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const HypothesisViolationError& e) {
    log << "abort (hypothesis violation): " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const AdmissibilityError& e) {
    log << "abort (admissibility): " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const BoundViolationError& e) {
    log << "abort (kernel bound): " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitInfra;
  }
}

}  // namespace bsdelab
