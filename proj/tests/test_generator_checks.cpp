#include <doctest.h>

#include <cmath>
#include <vector>

#include <bsdelab/brownian.hpp>
#include <bsdelab/builtins.hpp>
#include <bsdelab/checks.hpp>
#include <bsdelab/errors.hpp>
#include <bsdelab/generator.hpp>

using namespace bsdelab;

namespace {
CheckConfig small_cfg() {
  CheckConfig cfg;
  cfg.n_samples = 5000;  // plenty for the builtin drivers, keeps the suite fast
  return cfg;
}
}  // namespace

TEST_CASE("builtin catalog: names, params, constructibility") {
  const auto cat = builtin_catalog();
  std::size_t gens = 0, terms = 0, moduli = 0;
  for (const auto& e : cat) {
    if (e.kind == "generator") {
      ++gens;
      CHECK_NOTHROW(make_generator(e.name));
    } else if (e.kind == "terminal") {
      ++terms;
      CHECK_NOTHROW(make_terminal(e.name));
    } else {
      CHECK(e.kind == "osgood");
      ++moduli;
      CHECK_NOTHROW(make_osgood(e.name));
    }
  }
  CHECK(gens == 7);
  CHECK(terms == 9);
  CHECK(moduli == 2);

  CHECK_THROWS_AS(make_generator("no_such"), ConfigError);
  CHECK_THROWS_AS(make_terminal("no_such"), ConfigError);
  CHECK_THROWS_AS(make_osgood("no_such"), ConfigError);
  // unknown parameter names are rejected, not ignored
  CHECK_THROWS_AS(make_generator("linear", {{"q", 1.0}}), ConfigError);
  CHECK_THROWS_AS(make_terminal("scaled", {{"kappa", 1.0}}), ConfigError);
  CHECK_THROWS_AS(make_osgood("osgood_log", {{"K", 1.0}, {"J", 1.0}}), ConfigError);
  CHECK_THROWS_AS(make_generator("osgood_pull", {{"K", -1.0}}), ConfigError);
}

TEST_CASE("generator evaluation and declared structure") {
  const auto lin = make_generator("linear", {{"a", 2.0}, {"b", -0.5}, {"c", 1.0}});
  const double z[] = {3.0};
  CHECK(lin(0.0, 1.5, z) == 2.0 * 1.5 + (-0.5) * 3.0 + 1.0);
  CHECK(lin.lipschitz_z == 0.5);
  CHECK(lin.affine_in_z);
  CHECK(lin.lipschitz_y.has_value());
  CHECK(*lin.lipschitz_y == 2.0);
  CHECK(lin.at_zero(0.0, 1.5, 1) == 2.0 * 1.5 + 1.0);

  const auto cub = make_generator("cubic_decay", {{"b", 0.4}});
  CHECK(cub(0.0, 2.0, z) == -8.0 + 0.4 * 3.0);
  CHECK(cub.osgood.has_value());
  CHECK(!cub.lipschitz_y.has_value());

  const auto sq = make_generator("sqrt_abs");
  CHECK(!sq.lipschitz_y.has_value());
  CHECK(!sq.osgood.has_value());  // declares neither: downstream must refuse it
}

TEST_CASE("terminal evaluation against explicit paths") {
  const auto grid = TimeGrid::uniform(1.0, 4);
  const auto ens = BrownianEnsemble::generate(grid, 1, 20, 31);
  const auto sin_vals = evaluate_terminal(make_terminal("bounded_sin"), ens);
  const auto abs_vals = evaluate_terminal(make_terminal("abs_sin"), ens);
  const auto exp_vals = evaluate_terminal(make_terminal("exp_clipped", {{"kappa", 1.0}}), ens);
  for (std::size_t p = 0; p < 20; ++p) {
    const double wt = ens.terminal_level(p)[0];
    CHECK(sin_vals[p] == std::sin(wt));
    CHECK(abs_vals[p] == std::abs(std::sin(wt)));
    CHECK(exp_vals[p] == std::exp(std::min(wt, 1.0)));
  }
}

TEST_CASE("generator and terminal shifts") {
  const auto f = make_generator("linear");  // a=0.5 b=0.3 c=0.1
  const auto g = shift_generator(
      f, [](double t) { return 0.25 * t; }, 0.25, "+ramp");
  const double z[] = {1.0};
  CHECK(g(0.8, 2.0, z) == f(0.8, 2.0, z) + 0.2);
  CHECK(g.name == "linear+ramp");
  CHECK(g.lipschitz_z == f.lipschitz_z);           // shared
  CHECK(g.linear_growth == f.linear_growth + 0.25);  // absorbs sup |delta|
  CHECK_THROWS_AS(shift_generator(f, [](double) { return 0.0; }, -1.0, "x"), DomainError);

  const auto xi = make_terminal("bounded_sin");
  const auto eta = make_terminal("abs_sin");
  const auto shifted = shift_terminal(xi, eta, 0.5, "+bump");
  CHECK(shifted.name == "bounded_sin+bump");
  const auto ens = BrownianEnsemble::generate(TimeGrid::uniform(1.0, 3), 1, 8, 77);
  const auto a = evaluate_terminal(xi, ens);
  const auto b = evaluate_terminal(eta, ens);
  const auto c = evaluate_terminal(shifted, ens);
  for (std::size_t p = 0; p < 8; ++p) CHECK(c[p] == a[p] + 0.5 * b[p]);
}

TEST_CASE("girsanov kernel: bound, reconstruction, degenerate z") {
  const auto f = make_generator("linear", {{"a", 0.0}, {"b", 0.3}, {"c", 0.0}});
  double out1[1];
  // d = 1, affine: kernel is the z-coefficient itself wherever z != 0
  for (double zv : {-4.0, -0.1, 0.7, 25.0}) {
    const double z[] = {zv};
    girsanov_kernel(f, 0.3, 1.0, z, out1);
    CHECK(out1[0] == doctest::Approx(0.3).epsilon(1e-12));
  }
  const double z0[] = {0.0};
  girsanov_kernel(f, 0.3, 1.0, z0, out1);
  CHECK(out1[0] == 0.0);

  // d = 2 with only z_1 entering f: the kernel is a projection, |g| <= b,
  // and g . z recovers f(z) - f(0)
  GeneratorSpec f2;
  f2.name = "first_component";
  f2.lipschitz_z = 0.3;
  f2.eval = [](double, double, std::span<const double> zz) { return 0.3 * zz[0]; };
  const double z2[] = {1.0, 2.0};
  double out2[2];
  girsanov_kernel(f2, 0.0, 0.0, z2, out2);
  const double dot = out2[0] * z2[0] + out2[1] * z2[1];
  CHECK(dot == doctest::Approx(0.3 * z2[0]).epsilon(1e-12));
  CHECK(std::sqrt(out2[0] * out2[0] + out2[1] * out2[1]) <= 0.3 + 1e-12);

  double bad[1];
  CHECK_THROWS_AS(girsanov_kernel(f2, 0.0, 0.0, z2, bad), DimensionError);
}

TEST_CASE("declaration checks accept the honest builtins") {
  const auto cfg = small_cfg();
  for (const char* name : {"zero", "constant", "linear", "cubic_decay", "sine_drift"})
    CHECK_NOTHROW(require_declared_constants(make_generator(name), cfg));
  CHECK_NOTHROW(require_declared_constants(make_generator("osgood_pull", {{"K", 2.0}}), cfg));
}

TEST_CASE("declaration checks refuse false claims") {
  const auto cfg = small_cfg();

  // sqrt(|y|) with an injected Lipschitz-in-y claim: the tiny-pair draws
  // find the kink at 0 where no finite r works
  auto sq = make_generator("sqrt_abs");
  sq.lipschitz_y = 10.0;
  const auto rep = check_lipschitz_y(sq, 10.0, cfg);
  CHECK(!rep.passed);
  CHECK(rep.worst_excess > 0.0);
  CHECK(!rep.violations.empty());
  CHECK(rep.violations.size() <= 16);
  CHECK_THROWS_AS(require_declared_constants(sq, cfg), HypothesisViolationError);

  // understated Lipschitz-in-z on a plainly affine driver
  const auto lin = make_generator("linear", {{"a", 0.0}, {"b", 0.5}, {"c", 0.0}});
  CHECK(!check_lipschitz_z(lin, 0.2, cfg).passed);
  CHECK(check_lipschitz_z(lin, 0.5, cfg).passed);

  // understated growth constant
  CHECK(!check_linear_growth(make_generator("constant", {{"c", 5.0}}), 1.0, cfg).passed);

  CHECK_THROWS_AS(check_lipschitz_z(lin, -0.1, cfg), DomainError);
  CHECK_THROWS_AS(check_lipschitz_y(lin, -0.1, cfg), DomainError);
  CHECK_THROWS_AS(check_linear_growth(lin, -0.1, cfg), DomainError);
}

TEST_CASE("one-sided monotonicity distinguishes drift direction") {
  const auto cfg = small_cfg();
  const auto rho = make_osgood("osgood_linear", {{"K", 1.0}});
  // -y^3 is monotone decreasing: one-sided holds with any modulus
  CHECK(check_one_sided_monotone(make_generator("cubic_decay"), rho, cfg).passed);
  // +y^3 explodes upward: no modulus with slope 1 can hold under heavy tails
  GeneratorSpec up;
  up.name = "cubic_up";
  up.eval = [](double, double y, std::span<const double>) { return y * y * y; };
  CHECK(!check_one_sided_monotone(up, rho, cfg).passed);
}

TEST_CASE("osgood modulus vetting") {
  const auto cfg = small_cfg();
  CHECK(check_osgood_function(make_osgood("osgood_linear", {{"K", 3.0}}), cfg).passed);
  CHECK(check_osgood_function(make_osgood("osgood_log", {{"K", 1.0}}), cfg).passed);

  // sqrt(t): concave and increasing, but int_0 dt/sqrt(t) < inf
  OsgoodFunction root{"root", [](double t) { return std::sqrt(t); }};
  const auto rr = check_osgood_function(root, cfg);
  CHECK(!rr.passed);

  // t^2: integral diverges but convexity disqualifies it as a modulus
  OsgoodFunction square{"square", [](double t) { return t * t; }};
  CHECK(!check_osgood_function(square, cfg).passed);

  // decreasing function is rejected
  OsgoodFunction dec{"dec", [](double t) { return 1.0 / (1.0 + t); }};
  CHECK(!check_osgood_function(dec, cfg).passed);
}

TEST_CASE("continuity probe flags a non-vanishing modulus") {
  const auto cfg = small_cfg();
  CHECK(check_continuity_y(make_generator("sine_drift"), cfg).plausible);
  // oscillation faster than the finest probe scale: the jump estimate never
  // shrinks as h does (an isolated jump could slip between samples; a
  // non-vanishing modulus cannot)
  GeneratorSpec buzz;
  buzz.name = "buzz";
  buzz.eval = [](double, double y, std::span<const double>) { return std::sin(1e7 * y); };
  CHECK(!check_continuity_y(buzz, cfg).plausible);
}
