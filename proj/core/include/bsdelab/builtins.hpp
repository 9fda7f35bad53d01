#pragma once

#include <map>
#include <string>
#include <vector>

#include "bsdelab/generator.hpp"

namespace bsdelab {

using ParamMap = std::map<std::string, double>;

/// Named driver catalog. Parameters are keyword-only with defaults; unknown
/// keys are rejected so a typo cannot silently fall back to a default.
///
///   zero                      f = 0
///   constant{c}               f = c
///   linear{a,b,c}             f = a y + b z_1 + c
///   cubic_decay{b}            f = -y^3 + b z_1
///   sine_drift{a}             f = a sin(y)
///   sqrt_abs{}                f = sqrt(|y|)           (not Lipschitz in y)
///   osgood_pull{K}            f = -sign(y) rho_K(min(|y|,1))
GeneratorSpec make_generator(const std::string& name, const ParamMap& params = {});

///   constant{c}               xi = c
///   wt                        xi = W_T (first component)
///   bounded_sin               xi = sin(W_T)
///   bounded_sin_shift{delta}  xi = sin(W_T) + delta
///   abs_sin                   xi = |sin(W_T)|  (nonnegative envelope)
///   abs_WT                    xi = |W_T|
///   exp_clipped{kappa}        xi = exp(min(W_T, kappa))
///   exp_wt_squared            xi = exp(W_T^2)         (outside every psi class)
///   scaled{c}                 xi = c * sin(W_T)
TerminalSpec make_terminal(const std::string& name, const ParamMap& params = {});

///   osgood_linear{K}          rho(t) = K t
///   osgood_log{K}             rho(t) = K t (1 - log t) for t <= 1, K beyond
OsgoodFunction make_osgood(const std::string& name, const ParamMap& params = {});

struct BuiltinEntry {
  std::string kind;  // "generator" | "terminal" | "osgood"
  std::string name;
  std::vector<std::string> params;
};

/// Stable-ordered catalog for `list-builtins` and config validation.
std::vector<BuiltinEntry> builtin_catalog();

}  // namespace bsdelab
