#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsdelab/generator.hpp"

namespace bsdelab {

/// Sampling box for the declaration checks. Draws are uniform on
/// [0,T] x [-y_box, y_box] x [-z_box, z_box]^d; a `heavy_tail_fraction`
/// of the y/z draws is replaced by Cauchy-scaled values so that global
/// claims (monotonicity, Lipschitz-in-z) get probed far outside the box.
struct CheckConfig {
  double horizon = 1.0;
  std::size_t dim = 1;
  std::size_t n_samples = 20000;
  double y_box = 3.0;
  double z_box = 3.0;
  double heavy_tail_fraction = 0.1;
  std::uint64_t seed = 1234;
  // Slack per inequality, scaled by the magnitudes entering the comparison:
  // the checkers compare floating-point evaluations, and a difference of
  // two large f values carries cancellation noise proportional to their size.
  double tolerance = 1e-9;
};

struct ViolationSample {
  double t = 0.0;
  double y = 0.0;
  double y2 = 0.0;
  std::vector<double> z;
  std::vector<double> z2;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct CheckReport {
  std::string check;
  std::size_t n_samples = 0;
  bool passed = true;
  double worst_excess = 0.0;  // max(lhs - rhs), <= 0 when passed
  std::vector<ViolationSample> violations;  // capped at 16
  std::string box;  // human-readable sampling region

  std::string summary() const;
};

/// sign(y-y') (f(t,y,z) - f(t,y',z)) <= rho(|y-y'|), heavy tails on.
CheckReport check_one_sided_monotone(const GeneratorSpec& f, const OsgoodFunction& rho,
                                     const CheckConfig& cfg);

/// |f(t,y,z) - f(t,y,z')| <= b |z-z'|, heavy tails on.
CheckReport check_lipschitz_z(const GeneratorSpec& f, double b, const CheckConfig& cfg);

/// Continuity probe in y: max |f(t, y+h, z) - f(t,y,z)| over a shrinking
/// ladder of h. Reported, not certified; discontinuities show up as a
/// plateau that refuses to shrink.
struct ContinuityReport {
  std::vector<double> h_ladder;
  std::vector<double> max_jump;
  bool plausible = true;  // max_jump decays with h
};
ContinuityReport check_continuity_y(const GeneratorSpec& f, const CheckConfig& cfg);

/// |f(t,y,z)| <= a (1 + |y| + |z|) on the box only: linear growth is a
/// box-scoped claim here (polynomial drivers are still usable downstream),
/// and the box is recorded in the report.
CheckReport check_linear_growth(const GeneratorSpec& f, double a, const CheckConfig& cfg);

/// |f(t,y,z) - f(t,y',z)| <= r |y-y'|, heavy tails off (box-scoped like the
/// growth check; Lipschitz-in-y is only ever consumed on solver ranges).
CheckReport check_lipschitz_y(const GeneratorSpec& f, double r, const CheckConfig& cfg);

/// rho is a usable modulus: nondecreasing, concave (midpoint test),
/// rho(0) = 0, rho(t) > 0 for t > 0, on a log-spaced ladder; plus a
/// heuristic for int_0 dt/rho = inf (tail mass of 1/rho over
/// [1e-24, 1e-12] must not vanish -- calibrated for slopes K <~ 250).
CheckReport check_osgood_function(const OsgoodFunction& rho, const CheckConfig& cfg);

/// Runs the declaration checks implied by what the spec declares
/// (lipschitz_z always; osgood or lipschitz_y as present; linear growth).
/// Throws HypothesisViolationError naming the first failing check.
void require_declared_constants(const GeneratorSpec& f, const CheckConfig& cfg);

}  // namespace bsdelab
