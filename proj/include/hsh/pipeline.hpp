#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hsh/matrix.hpp"
#include "hsh/symnmf.hpp"

namespace hsh {

/// L distinct node indices drawn uniformly without replacement, sorted ascending.
inline std::vector<int> select_landmarks(Index n, Index count, std::uint64_t seed) {
  if (count < 2 || count > n)
    throw ValueError("landmark count must satisfy 2 <= L <= n (L=" + std::to_string(count) +
                     ", n=" + std::to_string(n) + ")");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6c6du};
  std::mt19937_64 rng(seq);
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  // Partial Fisher-Yates.
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

/// Least-squares solver for rows P minimising ||w - P (S H_L^T)||^2.
/// The Gram matrix (S H_L^T)(S H_L^T)^T gets a ridge of 1e-10 trace/K.
class TargetExtension {
 public:
  TargetExtension(const Matrix& s, const Matrix& h_landmarks) {
    if (s.rows() != s.cols() || s.cols() != h_landmarks.cols())
      throw DimensionError("S and H_L disagree on the cluster count");
    basis_ = s * h_landmarks.transpose();  // K x L
    Matrix gram = basis_ * basis_.transpose();
    const Index k = gram.rows();
    const double ridge = 1e-10 * gram.trace() / static_cast<double>(k);
    gram.diagonal().array() += ridge;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(lo > 0.0) || !std::isfinite(condition_) || condition_ > 1e15)
      throw SingularError("target extension Gram matrix is singular (condition " +
                          std::to_string(condition_) + ")",
                          condition_);
    solver_.compute(gram);
    if (solver_.info() != Eigen::Success)
      throw SingularError("target extension Gram factorization failed", condition_);
  }

  Index landmark_count() const noexcept { return basis_.cols(); }
  const Matrix& basis() const noexcept { return basis_; }
  double condition() const noexcept { return condition_; }

  /// One row per target; `distances` is D x L.
  Matrix extend(const Matrix& distances) const {
    if (distances.cols() != basis_.cols()) throw DimensionError("distance rows must have L entries");
    const Matrix rhs = basis_ * distances.transpose();  // K x D
    return solver_.solve(rhs).transpose();
  }

  RowVector extend_row(const RowVector& w) const { return extend(Matrix(w)).row(0); }

  double residual(const RowVector& w, const RowVector& p) const {
    return (w - p * basis_).squaredNorm();
  }

 private:
  Matrix basis_;
  Eigen::LDLT<Matrix> solver_;
  double condition_ = 0.0;
};

/// Closed-form extension of one target given its distances to the landmarks.
inline RowVector extend_target(const RowVector& w_il, const Matrix& s, const Matrix& h_landmarks) {
  if (w_il.size() != h_landmarks.rows()) throw DimensionError("w_iL must have one entry per landmark");
  return TargetExtension(s, h_landmarks).extend_row(w_il);
}

struct HshResult {
  FactorizeResult landmark_fit;
  Matrix target_h;  // D x K; unconstrained, may hold negatives
  Labels labels;    // global node order
  ValidityReport validity;
  std::vector<int> landmark_indices;
  std::vector<int> target_indices;
  Index clusters = 0;
  std::uint64_t seed = 0;
  double extension_residual = 0.0;  // ||W_DL - H_D S H_L^T||^2

  const FactorPair& landmark_factors() const noexcept { return landmark_fit.factors; }

  /// Stacks H_L and H_D back into global node order.
  Matrix global_h() const {
    const auto& hl = landmark_fit.factors.H;
    Matrix out(static_cast<Index>(labels.size()), hl.cols());
    for (std::size_t i = 0; i < landmark_indices.size(); ++i) out.row(landmark_indices[i]) = hl.row(i);
    for (std::size_t i = 0; i < target_indices.size(); ++i) out.row(target_indices[i]) = target_h.row(i);
    return out;
  }
};

/// Stage 1 factorizes W_LL; stage 2 extends every target in closed form.
inline HshResult run_hsh(const PartialObservation& obs, Index k, const FactorizeConfig& cfg) {
  obs.validate();
  if (k > obs.landmark_count()) throw ValueError("cluster count exceeds landmark count");
  HshResult res;
  res.clusters = k;
  res.seed = cfg.seed;
  res.landmark_indices = obs.landmark_indices;
  res.target_indices = obs.target_indices;
  res.landmark_fit = factorize(obs.landmark_block, k, cfg);
  const auto& fp = res.landmark_fit.factors;
  res.validity = validity_gaps(fp.S);

  res.labels.assign(static_cast<std::size_t>(obs.node_count()), 0);
  const auto landmark_labels = assign_labels(fp.H).labels;
  for (std::size_t i = 0; i < obs.landmark_indices.size(); ++i)
    res.labels[obs.landmark_indices[i]] = landmark_labels[i];

  if (obs.target_count() > 0) {
    TargetExtension ext(fp.S, fp.H);
    res.target_h = ext.extend(obs.target_block);
    res.extension_residual = (obs.target_block - res.target_h * ext.basis()).squaredNorm();
    const auto target_labels = assign_labels(res.target_h).labels;
    for (std::size_t i = 0; i < obs.target_indices.size(); ++i)
      res.labels[obs.target_indices[i]] = target_labels[i];
  } else {
    res.target_h = Matrix(0, k);
  }
  return res;
}

}  // namespace hsh
