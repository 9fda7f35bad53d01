#pragma once

#include <functional>
#include <vector>

namespace bsdelab {

struct QuadratureRule {
  std::vector<double> nodes;    // physicists' Hermite abscissae
  std::vector<double> weights;  // normalized: sum = 1 against N(0,1)
};

/// Gauss-Hermite rule via the Golub-Welsch tridiagonal eigenproblem,
/// pre-normalized so that E[h(Z)] ≈ Σ w_i h(sqrt(2) x_i) for Z ~ N(0,1).
QuadratureRule gauss_hermite(std::size_t n);

/// E[h(mean + stddev Z)], Z ~ N(0,1), with an internal convergence check
/// between two node counts (n and 3n/2). Throws QuadratureError if the two
/// refinements disagree beyond 1e-8 relative.
double normal_expectation(const std::function<double(double)>& h, double mean, double stddev,
                          std::size_t n_nodes = 80);

/// Reference value for the driver f(t,y,z) = a y + b z_1 + c with terminal
/// h(W_T), W scalar:
///   Y_0 = e^{aT} E[h(W_T + bT)] + c (e^{aT} - 1)/a   (c T when a = 0).
/// The z-linear part is absorbed by the drift shift, the y-linear part by
/// the integrating factor; exact for every (a, b, c).
double closed_form_linear(double a, double b, double c, double horizon,
                          const std::function<double(double)>& h, std::size_t n_nodes = 80);

}  // namespace bsdelab
