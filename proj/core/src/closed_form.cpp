#include "bsdelab/closed_form.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bsdelab/errors.hpp"

namespace bsdelab {

QuadratureRule gauss_hermite(std::size_t n) {
  if (n < 2) throw DomainError("gauss_hermite: need at least 2 nodes");
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    const double off = std::sqrt(static_cast<double>(k) / 2.0);
    j(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = off;
    j(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  if (es.info() != Eigen::Success) throw QuadratureError("gauss_hermite: eigensolve failed");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
    const double v0 = es.eigenvectors()(0, static_cast<Eigen::Index>(i));
    // first eigenvector component squared is the weight / sqrt(pi)
    rule.weights[i] = v0 * v0;
  }
  return rule;
}

namespace {

double apply(const QuadratureRule& rule, const std::function<double(double)>& h, double mean,
             double stddev) {
  double acc = 0.0;
  const double scale = stddev * std::numbers::sqrt2;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * h(mean + scale * rule.nodes[i]);
  return acc;
}

}  // namespace

double normal_expectation(const std::function<double(double)>& h, double mean, double stddev,
                          std::size_t n_nodes) {
  if (!(stddev >= 0.0) || !std::isfinite(stddev) || !std::isfinite(mean))
    throw DomainError("normal_expectation: bad mean/stddev");
  if (stddev == 0.0) return h(mean);
  const double v1 = apply(gauss_hermite(n_nodes), h, mean, stddev);
  const double v2 = apply(gauss_hermite(n_nodes + n_nodes / 2), h, mean, stddev);
  if (!(std::abs(v1 - v2) <= 1e-8 * (1.0 + std::abs(v2)))) {
    std::ostringstream os;
    os << "normal_expectation: refinement moved the value from " << v1 << " to " << v2
       << "; integrand not resolved at " << n_nodes << " nodes";
    throw QuadratureError(os.str());
  }
  return v2;
}

double closed_form_linear(double a, double b, double c, double horizon,
                          const std::function<double(double)>& h, std::size_t n_nodes) {
  if (!(horizon > 0.0)) throw DomainError("closed_form_linear: horizon must be positive");
  const double shifted = normal_expectation(h, b * horizon, std::sqrt(horizon), n_nodes);
  const double source = (a == 0.0) ? c * horizon : c * std::expm1(a * horizon) / a;
  return std::exp(a * horizon) * shifted + source;
}

}  // namespace bsdelab
