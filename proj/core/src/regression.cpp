#include "bsdelab/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsdelab/errors.hpp"
#include "bsdelab/math_util.hpp"

namespace bsdelab {

void BasisSpec::features(std::span<const double> w, std::span<double> out) const {
  out[0] = 1.0;
  std::size_t j = 1;
  for (std::size_t k = 0; k < w.size(); ++k) {
    double p = 1.0;
    for (int deg = 0; deg < degree; ++deg) {
      p *= w[k];
      out[j++] = p;
    }
  }
}

std::string BasisSpec::describe() const {
  std::ostringstream os;
  os << "poly" << degree << "(ridge=" << ridge_scale << ")";
  return os.str();
}

namespace {

constexpr double kCondLimit = 1e14;

}  // namespace

NodeRegressor::NodeRegressor(const BasisSpec& basis, const double* levels,
                             std::size_t level_stride, std::size_t n_paths, std::size_t dim,
                             std::size_t node_index)
    : basis_(basis),
      levels_(levels),
      level_stride_(level_stride),
      n_paths_(n_paths),
      dim_(dim),
      node_(node_index),
      q_(basis.n_features(dim)) {
  if (basis_.degree < 1) throw DomainError("BasisSpec: degree must be >= 1");
  if (n_paths_ < q_) throw RegressionError("fewer paths than basis functions", node_);

  // blocked partial Grams, combined in block order
  const std::size_t bs = kDefaultBlock;
  const std::size_t nblocks = (n_paths_ + bs - 1) / bs;
  std::vector<std::vector<double>> partials(nblocks, std::vector<double>(q_ * q_, 0.0));
  parallel_for(nblocks, [&](std::size_t bb, std::size_t be) {
    std::vector<double> feat(q_);
    for (std::size_t blk = bb; blk < be; ++blk) {
      auto& g = partials[blk];
      const std::size_t pe = std::min(n_paths_, (blk + 1) * bs);
      for (std::size_t p = blk * bs; p < pe; ++p) {
        basis_.features(std::span<const double>(levels_ + p * level_stride_, dim_),
                        std::span<double>(feat));
        for (std::size_t r = 0; r < q_; ++r)
          for (std::size_t c = r; c < q_; ++c) g[r * q_ + c] += feat[r] * feat[c];
      }
    }
  });
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q_),
                                               static_cast<Eigen::Index>(q_));
  for (const auto& g : partials)
    for (std::size_t r = 0; r < q_; ++r)
      for (std::size_t c = r; c < q_; ++c)
        gram(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += g[r * q_ + c];
  for (std::size_t r = 0; r < q_; ++r)
    for (std::size_t c = 0; c < r; ++c)
      gram(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          gram(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
  if (!gram.allFinite()) throw RegressionError("non-finite Gram matrix", node_);

  const double lambda = basis_.ridge_scale * static_cast<double>(n_paths_);
  for (std::size_t j = 1; j < q_; ++j)
    gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += lambda;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success)
    throw RegressionError("eigendecomposition of Gram failed", node_);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0))
    throw RegressionError("rank-deficient regression (Gram not positive definite)", node_);
  cond_ = lmax / lmin;
  if (cond_ > kCondLimit)
    throw RegressionError("regression condition number " + std::to_string(cond_) +
                              " exceeds limit",
                          node_);
  const Eigen::MatrixXd inv =
      es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();
  gram_inv_.assign(inv.data(), inv.data() + q_ * q_);  // symmetric, layout irrelevant
}

std::vector<double> NodeRegressor::fit(std::span<const double> targets) const {
  if (targets.size() != n_paths_) throw DimensionError("NodeRegressor::fit: target size");
  // constant targets are already measurable: project to themselves exactly
  // instead of taking the rounding noise of the normal equations
  const auto [mn, mx] = std::minmax_element(targets.begin(), targets.end());
  if (*mn == *mx && std::isfinite(*mn)) {
    std::vector<double> beta(q_, 0.0);
    beta[0] = *mn;
    return beta;
  }
  // rhs_j = sum_p feat_j(p) * y_p, blocked like the Gram
  const std::size_t bs = kDefaultBlock;
  const std::size_t nblocks = (n_paths_ + bs - 1) / bs;
  std::vector<std::vector<double>> partials(nblocks, std::vector<double>(q_, 0.0));
  parallel_for(nblocks, [&](std::size_t bb, std::size_t be) {
    std::vector<double> feat(q_);
    for (std::size_t blk = bb; blk < be; ++blk) {
      auto& r = partials[blk];
      const std::size_t pe = std::min(n_paths_, (blk + 1) * bs);
      for (std::size_t p = blk * bs; p < pe; ++p) {
        basis_.features(std::span<const double>(levels_ + p * level_stride_, dim_),
                        std::span<double>(feat));
        const double y = targets[p];
        for (std::size_t j = 0; j < q_; ++j) r[j] += feat[j] * y;
      }
    }
  });
  std::vector<double> rhs(q_, 0.0);
  for (const auto& r : partials)
    for (std::size_t j = 0; j < q_; ++j) rhs[j] += r[j];

  std::vector<double> beta(q_, 0.0);
  for (std::size_t r = 0; r < q_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < q_; ++c) s += gram_inv_[r * q_ + c] * rhs[c];
    beta[r] = s;
  }
  for (double v : beta)
    if (!std::isfinite(v)) throw RegressionError("non-finite regression solution", node_);
  return beta;
}

void NodeRegressor::predict(std::span<const double> coeffs, std::span<double> out) const {
  if (coeffs.size() != q_ || out.size() != n_paths_)
    throw DimensionError("NodeRegressor::predict: size mismatch");
  parallel_for(n_paths_, [&](std::size_t pb, std::size_t pe) {
    std::vector<double> feat(q_);
    for (std::size_t p = pb; p < pe; ++p) {
      basis_.features(std::span<const double>(levels_ + p * level_stride_, dim_),
                      std::span<double>(feat));
      double s = 0.0;
      for (std::size_t j = 0; j < q_; ++j) s += coeffs[j] * feat[j];
      out[p] = s;
    }
  });
}

std::vector<double> NodeRegressor::fit_predict(std::span<const double> targets,
                                               std::span<double> out) const {
  std::vector<double> beta = fit(targets);
  predict(beta, out);
  return beta;
}

double NodeRegressor::residual_rms(std::span<const double> coeffs,
                                   std::span<const double> targets) const {
  if (targets.size() != n_paths_) throw DimensionError("residual_rms: target size");
  const double ss = blocked_sum(n_paths_, kDefaultBlock, [&](std::size_t b, std::size_t e) {
    std::vector<double> feat(q_);
    double acc = 0.0;
    for (std::size_t p = b; p < e; ++p) {
      basis_.features(std::span<const double>(levels_ + p * level_stride_, dim_),
                      std::span<double>(feat));
      double s = 0.0;
      for (std::size_t j = 0; j < q_; ++j) s += coeffs[j] * feat[j];
      const double r = targets[p] - s;
      acc += r * r;
    }
    return acc;
  });
  return std::sqrt(ss / static_cast<double>(n_paths_));
}

}  // namespace bsdelab
