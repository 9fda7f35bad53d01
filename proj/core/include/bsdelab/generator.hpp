#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsdelab/brownian.hpp"

namespace bsdelab {

/// Concave modulus rho with rho(0) = 0, used by the one-sided monotonicity
/// condition  sign(y - y') (f(t,y,z) - f(t,y',z)) <= rho(|y - y'|).
struct OsgoodFunction {
  std::string name;
  std::function<double(double)> eval;  // defined for t >= 0

  double operator()(double t) const { return eval(t); }
};

/// Driver f(t, y, z) together with the constants the owner declares for it.
/// Declarations are claims, not guarantees: the sampling checks and the
/// kernel bound test them, and a false declaration surfaces as a typed error
/// downstream rather than silent garbage.
struct GeneratorSpec {
  std::string name;
  std::function<double(double t, double y, std::span<const double> z)> eval;

  double lipschitz_z = 0.0;               // b: |f(t,y,z) - f(t,y,z')| <= b |z - z'|
  double linear_growth = 0.0;             // a: |f(t,y,z)| <= a(1 + |y| + |z|) -- on the check box
  std::optional<double> lipschitz_y;      // r, when f is Lipschitz in y
  std::optional<OsgoodFunction> osgood;   // rho, when only one-sided monotone
  bool affine_in_z = false;               // f(t,y,z) = f(t,y,0) + zc . z
  std::vector<double> z_coefficients;     // zc (first components; trailing zeros implied)

  double operator()(double t, double y, std::span<const double> z) const { return eval(t, y, z); }
  double at_zero(double t, double y, std::size_t dim) const;
};

/// f + delta(t): shifted driver sharing every declared constant with f
/// except linear growth, which absorbs sup |delta|.
GeneratorSpec shift_generator(const GeneratorSpec& f, std::function<double(double)> delta,
                              double delta_sup, const std::string& suffix);

/// Terminal functional xi = h(path). Sees the whole path through the levels
/// row, so path-dependent terminals fit the same type.
struct TerminalSpec {
  std::string name;
  /// terminal_levels = W_T components; full levels row available via `levels`
  /// (n_nodes x dim, node-major) for path-dependent functionals.
  std::function<double(std::span<const double> terminal_levels,
                       std::span<const double> levels, std::size_t n_nodes, std::size_t dim)>
      eval;
};

TerminalSpec shift_terminal(const TerminalSpec& xi, const TerminalSpec& eta, double weight,
                            const std::string& suffix);

std::vector<double> evaluate_terminal(const TerminalSpec& xi, const BrownianEnsemble& ens);

/// Girsanov kernel of f at (t, y, z):
///   g = (f(t,y,z) - f(t,y,0)) z / |z|^2   for |z| != 0, else 0.
/// When f is Lipschitz in z with constant b, |g| <= b pointwise: g . z
/// recovers f(t,y,z) - f(t,y,0) and Cauchy-Schwarz caps the norm.
void girsanov_kernel(const GeneratorSpec& f, double t, double y, std::span<const double> z,
                     std::span<double> out);

}  // namespace bsdelab
