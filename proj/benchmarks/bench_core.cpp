// Microbenchmarks for the hot paths: path generation, psi evaluation,
// per-node regression, a small backward solve, and the density exponential.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include <bsdelab/brownian.hpp>
#include <bsdelab/builtins.hpp>
#include <bsdelab/psi.hpp>
#include <bsdelab/regression.hpp>
#include <bsdelab/solver.hpp>
#include <bsdelab/stochastic.hpp>
#include <bsdelab/time_grid.hpp>

using namespace bsdelab;

static void bm_generate_ensemble(benchmark::State& state) {
  const std::size_t n_paths = static_cast<std::size_t>(state.range(0));
  TimeGrid grid = TimeGrid::uniform(1.0, 50);
  for (auto _ : state) {
    BrownianEnsemble ens = BrownianEnsemble::generate(grid, 1, n_paths, 42);
    benchmark::DoNotOptimize(const_cast<double*>(ens.raw().data()));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(n_paths * grid.steps()));
}
BENCHMARK(bm_generate_ensemble)->Arg(1 << 12)->Arg(1 << 14);

static void bm_psi_eval(benchmark::State& state) {
  double x = 0.0;
  double acc = 0.0;
  for (auto _ : state) {
    x += 1.0;
    acc += psi(x, 1.5);
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(bm_psi_eval);

static void bm_node_regression(benchmark::State& state) {
  const std::size_t n_paths = static_cast<std::size_t>(state.range(0));
  TimeGrid grid = TimeGrid::uniform(1.0, 20);
  BrownianEnsemble ens = BrownianEnsemble::generate(grid, 1, n_paths, 42);
  BrownianLevels levels = BrownianLevels::from(ens);
  BasisSpec basis;
  const std::size_t node = 10;
  std::vector<double> target(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) target[p] = std::sin(levels.row(p, node)[0]);
  std::vector<double> fitted(n_paths);
  const std::size_t stride = levels.n_nodes * levels.dim;
  for (auto _ : state) {
    NodeRegressor reg(basis, levels.row(0, node), stride, n_paths, 1, node);
    reg.fit_predict(target, fitted);
    benchmark::DoNotOptimize(fitted.data());
  }
}
BENCHMARK(bm_node_regression)->Arg(1 << 12)->Arg(1 << 14);

static void bm_backward_solve(benchmark::State& state) {
  const std::size_t n_paths = static_cast<std::size_t>(state.range(0));
  TimeGrid grid = TimeGrid::uniform(1.0, 20);
  BrownianEnsemble ens = BrownianEnsemble::generate(grid, 1, n_paths, 42);
  BsdeProblem prob(make_generator("linear", {{"a", 0.5}, {"b", 0.3}, {"c", 0.1}}),
                   make_terminal("bounded_sin"));
  SolverOptions opts;
  opts.run_declaration_checks = false;
  for (auto _ : state) {
    SolutionEnsemble sol = solve_backward_euler(prob, ens, opts);
    benchmark::DoNotOptimize(sol.y.data());
  }
}
BENCHMARK(bm_backward_solve)->Arg(1 << 12);

static void bm_stochastic_exponential(benchmark::State& state) {
  const std::size_t n_paths = static_cast<std::size_t>(state.range(0));
  TimeGrid grid = TimeGrid::uniform(1.0, 50);
  BrownianEnsemble ens = BrownianEnsemble::generate(grid, 1, n_paths, 42);
  const double coeff[1] = {0.3};
  AdaptedProcess phi = AdaptedProcess::constant(ens, coeff);
  for (auto _ : state) {
    DensityPath d = stochastic_exponential(ens, phi, 0.3);
    benchmark::DoNotOptimize(d.log_values.data());
  }
}
BENCHMARK(bm_stochastic_exponential)->Arg(1 << 14);

BENCHMARK_MAIN();
