#pragma once

#include <string>

namespace bsdelab {

/// psi(x, mu) = x * exp(mu * sqrt(2 * log(1 + x))) for x >= 0, mu > 0.
///
/// This is the weight defining the integrability class the whole library
/// works in: terminal values are required to have E[psi(|xi|, mu)] finite.
/// psi is increasing and convex in x, psi(0) = 0.
double psi(double x, double mu);

/// Parameter pack (mu, b, T) shared by everything that reasons about
/// exponential moments. b is the Lipschitz-in-z constant of the generator;
/// the interesting regime is mu > b * sqrt(T).
struct PsiParams {
  double mu = 1.0;
  double b = 0.0;
  double horizon = 1.0;

  PsiParams() = default;
  PsiParams(double mu_, double b_, double horizon_);

  bool is_supercritical() const noexcept;
  std::string describe() const;
};

/// Young-type splitting residual:
///   exp(x^2 / (2 mu^2)) + exp(2 mu^2) * psi(y, mu) - exp(x) * y
/// for real x, y >= 0, mu > 0. Nonnegative for all valid inputs.
/// Evaluated in log space when the terms overflow so the sign survives;
/// returns +inf/-inf instead of NaN in that regime.
double product_inequality_residual(double x, double y, double mu);

/// lambda * psi(x) + (1-lambda) * psi(y) - psi(lambda x + (1-lambda) y).
/// Nonnegative (convexity). x, y >= 0, lambda in [0,1].
double psi_convexity_residual(double x, double y, double lambda, double mu);

/// psi(l, mu) * psi(x, mu) - psi(l * x, mu) for l > 1, x >= 0.
/// Nonnegative: psi is submultiplicative against scalings above 1.
double psi_scaling_residual(double l, double x, double mu);

/// (1 - b^2 (T - t) / mu^2)^(-1/2): the closed-form bound on
/// E[exp(|I|^2 / (2 mu^2))] for a stochastic integral I of a kernel bounded
/// by b over [t, T]. Throws SubcriticalError when mu <= b sqrt(T - t), where
/// the bound ceases to exist; equals 1 exactly at t = T or b = 0.
double exp_moment_bound(const PsiParams& params, double t);

}  // namespace bsdelab
