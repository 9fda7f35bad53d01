#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <bsdelab/brownian.hpp>
#include <bsdelab/errors.hpp>
#include <bsdelab/math_util.hpp>
#include <bsdelab/stochastic.hpp>
#include <bsdelab/time_grid.hpp>

using namespace bsdelab;

TEST_CASE("TimeGrid construction and validation") {
  const auto g = TimeGrid::uniform(1.0, 4);
  CHECK(g.steps() == 4);
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(4) == 1.0);
  CHECK(g.dt(1) == 0.25);
  CHECK(g.max_dt() == 0.25);
  CHECK(g.horizon() == 1.0);
  CHECK(g == TimeGrid::uniform(1.0, 4));
  CHECK(!(g == TimeGrid::uniform(1.0, 5)));

  CHECK_THROWS_AS(TimeGrid({0.0}), DomainError);                  // one node
  CHECK_THROWS_AS(TimeGrid({0.5, 1.0}), DomainError);             // starts off 0
  CHECK_THROWS_AS(TimeGrid({0.0, 0.5, 0.5}), DomainError);        // flat step
  CHECK_THROWS_AS(TimeGrid({0.0, 0.7, 0.4}), DomainError);        // decreasing
  CHECK_THROWS_AS(TimeGrid({0.0, 1e-15, 1.0}), DomainError);      // degenerate step
  CHECK_THROWS_AS(TimeGrid::uniform(0.0, 4), DomainError);
  CHECK_THROWS_AS(TimeGrid::uniform(1.0, 0), DomainError);

  const auto fine = g.refined_halving();
  CHECK(fine.steps() == 8);
  for (std::size_t i = 0; i <= 4; ++i) CHECK(fine.node(2 * i) == g.node(i));
}

TEST_CASE("ensemble generation is pure and prefix-stable") {
  const auto grid = TimeGrid::uniform(1.0, 8);
  const auto a = BrownianEnsemble::generate(grid, 2, 64, 42);
  const auto b = BrownianEnsemble::generate(grid, 2, 64, 42);
  CHECK(a.raw() == b.raw());  // bitwise
  CHECK(a.digest() == b.digest());
  CHECK(!a.derived());

  // the first 64 paths of a 128-path ensemble are the same bits: paths are
  // keyed by index, not by position in a shared stream
  const auto big = BrownianEnsemble::generate(grid, 2, 128, 42);
  const std::size_t prefix = 64 * grid.steps() * 2;
  CHECK(std::equal(a.raw().begin(), a.raw().end(), big.raw().begin(),
                   big.raw().begin() + static_cast<std::ptrdiff_t>(prefix)));

  CHECK(BrownianEnsemble::generate(grid, 1, 17, 43).digest() !=
        BrownianEnsemble::generate(grid, 1, 17, 44).digest());
}

TEST_CASE("ensemble budget and shape errors") {
  const auto grid = TimeGrid::uniform(1.0, 10);
  CHECK_NOTHROW(BrownianEnsemble::generate(grid, 1, 5, 1, /*budget=*/50));
  CHECK_THROWS_AS(BrownianEnsemble::generate(grid, 1, 6, 1, /*budget=*/50), ResourceError);
  CHECK_THROWS_AS(BrownianEnsemble::generate(grid, 0, 6, 1), DomainError);
  CHECK_THROWS_AS(BrownianEnsemble::generate(grid, 1, 0, 1), DomainError);
  CHECK_THROWS_AS(
      BrownianEnsemble::from_increments(grid, 1, 4, 1, std::vector<double>(39), true),
      DimensionError);
}

TEST_CASE("increment statistics match the grid") {
  const auto grid = TimeGrid::uniform(2.0, 5);
  const auto ens = BrownianEnsemble::generate(grid, 1, 60000, 7);
  // each step's increments are N(0, dt): dt = 0.4
  std::vector<double> xs(ens.n_paths());
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    for (std::size_t p = 0; p < ens.n_paths(); ++p) xs[p] = ens.increment(p, i, 0);
    const auto s = summarize(xs);
    CHECK(std::abs(s.mean) < 4.0 * s.stderr_of_mean);
    CHECK(s.stddev == doctest::Approx(std::sqrt(0.4)).epsilon(2e-2));
  }
}

TEST_CASE("levels are prefix sums and agree with terminal_level") {
  const auto grid = TimeGrid::uniform(1.0, 6);
  const auto ens = BrownianEnsemble::generate(grid, 3, 50, 11);
  const auto lv = BrownianLevels::from(ens);
  CHECK(lv.n_nodes == 7);
  CHECK(lv.dim == 3);
  for (std::size_t p = 0; p < ens.n_paths(); ++p) {
    const auto wt = ens.terminal_level(p);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(lv.at(p, 0, k) == 0.0);
      CHECK(lv.at(p, lv.n_nodes - 1, k) == wt[k]);  // same summation order: bitwise
    }
  }
}

TEST_CASE("bridge refinement preserves the coarse increments") {
  const auto grid = TimeGrid::uniform(1.0, 5);
  const auto ens = BrownianEnsemble::generate(grid, 2, 400, 3);
  const auto fine = refine_halving(ens);
  CHECK(fine.grid().steps() == 10);
  CHECK(fine.derived());
  // the complement half absorbs one rounding at the scale of the halves, so
  // the pair sum matches the coarse increment to a couple of ulps of that
  // scale (bitwise is unattainable once the bridge noise dwarfs the target)
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t p = 0; p < ens.n_paths(); ++p)
    for (std::size_t i = 0; i < grid.steps(); ++i)
      for (std::size_t k = 0; k < 2; ++k) {
        const double a = fine.increment(p, 2 * i, k);
        const double b = fine.increment(p, 2 * i + 1, k);
        const double c = ens.increment(p, i, k);
        const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
        CHECK(std::abs(a + b - c) <= 2.0 * eps * scale);
      }
  // refinement is itself deterministic
  CHECK(refine_halving(ens).digest() == fine.digest());
}

TEST_CASE("csv dump format") {
  const auto ens = BrownianEnsemble::generate(TimeGrid::uniform(1.0, 2), 1, 2, 5);
  std::ostringstream os;
  dump_increments_csv(ens, os);
  const std::string text = os.str();
  CHECK(text.rfind("path,step,dim,increment\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 1 + 2 * 2);
}

TEST_CASE("adapted process construction and adaptedness") {
  const auto grid = TimeGrid::uniform(1.0, 4);
  const auto ens = BrownianEnsemble::generate(grid, 1, 30, 9);
  // the history hook must see the LEFT node level: at step 0 that is 0
  const auto phi = AdaptedProcess::from_history(
      ens, [](std::size_t, std::size_t, double, std::span<const double> w,
              std::span<double> out) { out[0] = w[0]; });
  const auto lv = BrownianLevels::from(ens);
  for (std::size_t p = 0; p < 30; ++p)
    for (std::size_t i = 0; i < 4; ++i) CHECK(phi.value(p, i, 0) == lv.at(p, i, 0));

  const double c2[] = {1.5, -2.0};
  CHECK_THROWS_AS(AdaptedProcess::constant(ens, c2), DimensionError);
  CHECK_THROWS_AS(AdaptedProcess::from_values(30, 4, 1, std::vector<double>(100)),
                  DimensionError);
  const double c1[] = {1.5};
  const auto k = AdaptedProcess::constant(ens, c1);
  CHECK(k.norm_sq(3, 2) == 1.5 * 1.5);
}

TEST_CASE("ito integral of a unit kernel reproduces the terminal level") {
  const auto grid = TimeGrid::uniform(1.0, 7);
  const auto ens = BrownianEnsemble::generate(grid, 1, 25, 13);
  const double one[] = {1.0};
  const auto phi = AdaptedProcess::constant(ens, one);
  const auto full = ito_integral(ens, phi, grid.steps());
  const auto none = ito_integral(ens, phi, 0);
  for (std::size_t p = 0; p < 25; ++p) {
    CHECK(full[p] == ens.terminal_level(p)[0]);  // same order of summation
    CHECK(none[p] == 0.0);
  }
  CHECK_THROWS_AS(ito_integral(ens, phi, grid.steps() + 1), DomainError);
}

TEST_CASE("stochastic exponential: martingale mean and second moment") {
  const auto grid = TimeGrid::uniform(1.0, 20);
  const auto ens = BrownianEnsemble::generate(grid, 1, 50000, 21);
  const double half[] = {0.5};
  const auto phi = AdaptedProcess::constant(ens, half);
  const auto dp = stochastic_exponential(ens, phi, 0.5);
  CHECK(dp.n_nodes == 21);
  std::vector<double> d(ens.n_paths()), d2(ens.n_paths());
  for (std::size_t p = 0; p < ens.n_paths(); ++p) {
    CHECK(dp.log_at(p, 0) == 0.0);
    d[p] = dp.at(p, dp.n_nodes - 1);
    d2[p] = d[p] * d[p];
  }
  const auto s1 = summarize(d);
  CHECK(std::abs(s1.mean - 1.0) < 4.0 * s1.stderr_of_mean);
  // constant kernel 0.5 over T = 1: E[D_T^2] = exp(b^2 T) = 1.28402541668774148
  const auto s2 = summarize(d2);
  CHECK(std::abs(s2.mean - 1.28402541668774148407342056806) < 4.0 * s2.stderr_of_mean);
}

TEST_CASE("stochastic exponential rejects kernels that break their declared bound") {
  const auto ens = BrownianEnsemble::generate(TimeGrid::uniform(1.0, 3), 1, 4, 2);
  const double half[] = {0.5};
  const auto phi = AdaptedProcess::constant(ens, half);
  CHECK_NOTHROW(stochastic_exponential(ens, phi, 0.5));   // equality is allowed
  CHECK_THROWS_AS(stochastic_exponential(ens, phi, 0.4), BoundViolationError);
  CHECK_THROWS_AS(stochastic_exponential(ens, phi, -1.0), DomainError);
}

TEST_CASE("drift shift subtracts phi dt exactly") {
  const auto grid = TimeGrid::uniform(2.0, 5);
  const auto ens = BrownianEnsemble::generate(grid, 2, 40, 17);
  const double coeffs[] = {0.5, -0.25};
  const auto phi = AdaptedProcess::constant(ens, coeffs);
  const auto shifted = drift_shifted_ensemble(ens, phi);
  CHECK(shifted.derived());
  CHECK(shifted.grid() == grid);
  for (std::size_t p = 0; p < 40; ++p)
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t k = 0; k < 2; ++k)
        CHECK(shifted.increment(p, i, k) ==
              ens.increment(p, i, k) - coeffs[k] * grid.dt(i));
}
