#include "bsdelab/psi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bsdelab/errors.hpp"

namespace bsdelab {

namespace {

constexpr double kLogMax = 709.0;  // exp() overflows just above this

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw DomainError(std::string(name) + " must be finite");
}

void require_mu(double mu) {
  require_finite(mu, "mu");
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
}

}  // namespace

double psi(double x, double mu) {
  require_finite(x, "x");
  require_mu(mu);
  if (x < 0.0) throw DomainError("psi: x must be nonnegative");
  if (x == 0.0) return 0.0;
  // log1p keeps the exponent accurate near x = 0
  return x * std::exp(mu * std::sqrt(2.0 * std::log1p(x)));
}

PsiParams::PsiParams(double mu_, double b_, double horizon_)
    : mu(mu_), b(b_), horizon(horizon_) {
  require_mu(mu);
  require_finite(b, "b");
  require_finite(horizon, "horizon");
  if (b < 0.0) throw DomainError("PsiParams: b must be nonnegative");
  if (!(horizon > 0.0)) throw DomainError("PsiParams: horizon must be positive");
}

bool PsiParams::is_supercritical() const noexcept {
  return mu > b * std::sqrt(horizon);
}

std::string PsiParams::describe() const {
  std::ostringstream os;
  os << "mu=" << mu << " b=" << b << " T=" << horizon
     << (is_supercritical() ? " (supercritical)" : " (subcritical)");
  return os.str();
}

double product_inequality_residual(double x, double y, double mu) {
  require_finite(x, "x");
  require_finite(y, "y");
  require_mu(mu);
  if (y < 0.0) throw DomainError("product_inequality_residual: y must be nonnegative");

  const double log_r1 = x * x / (2.0 * mu * mu);
  if (y == 0.0) {
    // both y-terms vanish exactly; avoid log(0) below
    return log_r1 > kLogMax ? std::numeric_limits<double>::infinity() : std::exp(log_r1);
  }
  const double log_y = std::log(y);
  const double log_r2 = 2.0 * mu * mu + log_y + mu * std::sqrt(2.0 * std::log1p(y));
  const double log_lhs = x + log_y;

  const double m = std::max({log_r1, log_r2, log_lhs});
  if (m <= 700.0) {
    return std::exp(log_r1) + std::exp(log_r2) - std::exp(log_lhs);
  }
  // factor out the dominant exponent so the comparison happens at scale ~1
  const double scaled = std::exp(log_r1 - m) + std::exp(log_r2 - m) - std::exp(log_lhs - m);
  if (scaled == 0.0) return 0.0;
  if (m <= kLogMax) return scaled * std::exp(m);
  return scaled > 0.0 ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
}

double psi_convexity_residual(double x, double y, double lambda, double mu) {
  require_finite(x, "x");
  require_finite(y, "y");
  require_finite(lambda, "lambda");
  if (x < 0.0 || y < 0.0) throw DomainError("psi_convexity_residual: x, y must be nonnegative");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw DomainError("psi_convexity_residual: lambda outside [0,1]");
  return lambda * psi(x, mu) + (1.0 - lambda) * psi(y, mu) -
         psi(lambda * x + (1.0 - lambda) * y, mu);
}

double psi_scaling_residual(double l, double x, double mu) {
  require_finite(l, "l");
  require_finite(x, "x");
  if (!(l > 1.0)) throw DomainError("psi_scaling_residual: l must exceed 1");
  if (x < 0.0) throw DomainError("psi_scaling_residual: x must be nonnegative");
  return psi(l, mu) * psi(x, mu) - psi(l * x, mu);
}

double exp_moment_bound(const PsiParams& params, double t) {
  require_finite(t, "t");
  if (t < 0.0 || t > params.horizon)
    throw DomainError("exp_moment_bound: t outside [0, horizon]");
  const double remaining = params.horizon - t;
  const double critical = params.b * std::sqrt(remaining);
  if (!(params.mu > critical)) {
    std::ostringstream os;
    os << "exp_moment_bound: mu=" << params.mu << " <= b*sqrt(T-t)=" << critical
       << "; the exponential moment bound does not exist in this regime";
    throw SubcriticalError(os.str());
  }
  const double ratio = params.b * params.b * remaining / (params.mu * params.mu);
  return 1.0 / std::sqrt(1.0 - ratio);
}

}  // namespace bsdelab
