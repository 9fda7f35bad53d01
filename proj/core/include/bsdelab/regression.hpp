#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bsdelab {

/// Additive polynomial basis in the Brownian level: {1} ∪ {w_k^j} for each
/// component k and power j = 1..degree (no cross terms). The ridge penalty
/// lambda = ridge_scale * n_paths is applied to every coefficient except the
/// intercept, so constants are always reproduced exactly.
struct BasisSpec {
  int degree = 3;
  double ridge_scale = 1e-8;

  std::size_t n_features(std::size_t dim) const { return 1 + dim * static_cast<std::size_t>(degree); }
  void features(std::span<const double> w, std::span<double> out) const;
  std::string describe() const;
};

/// Least-squares projection onto the basis at one grid node, against the
/// level rows of an ensemble. The Gram matrix is assembled once (blocked,
/// fixed combination order, so thread count cannot change the bits) and its
/// penalized inverse is cached; each fit() is then one streamed pass.
class NodeRegressor {
 public:
  NodeRegressor(const BasisSpec& basis, const double* levels, std::size_t level_stride,
                std::size_t n_paths, std::size_t dim, std::size_t node_index);

  std::vector<double> fit(std::span<const double> targets) const;
  void predict(std::span<const double> coeffs, std::span<double> out) const;
  std::vector<double> fit_predict(std::span<const double> targets, std::span<double> out) const;

  /// Residual root-mean-square of a fitted target (one extra pass).
  double residual_rms(std::span<const double> coeffs, std::span<const double> targets) const;

  double condition_number() const noexcept { return cond_; }
  std::size_t node_index() const noexcept { return node_; }

 private:
  BasisSpec basis_;
  const double* levels_;      // first path's level row at this node
  std::size_t level_stride_;  // doubles between consecutive paths' rows
  std::size_t n_paths_;
  std::size_t dim_;
  std::size_t node_;
  std::size_t q_;
  std::vector<double> gram_inv_;  // q x q row-major penalized inverse
  double cond_ = 0.0;
};

}  // namespace bsdelab
