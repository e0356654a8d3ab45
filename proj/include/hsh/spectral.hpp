#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hsh/matrix.hpp"

namespace hsh {

/// Real pseudo-Euclidean form of the complex projection x -> x D^{1/2}:
/// W[i][j] = sum_k signature[k] * coords(i,k) * coords(j,k).
struct SignedEmbedding {
  Matrix coords;          // n x r, column k scaled by |lambda_k|^{1/2}
  Vector signature;       // +1 / -1 per column
  Vector eigenvalues;     // descending |lambda|
  Matrix eigenvectors;    // n x r, orthonormal columns

  Index rank() const noexcept { return coords.cols(); }

  Matrix reconstruct() const {
    return coords * signature.asDiagonal() * coords.transpose();
  }
};

/// Number of eigenvalues with |lambda| > 1e-8 |lambda_max| (at least 1).
inline Index default_rank(const Vector& eigenvalues) {
  const double top = eigenvalues.cwiseAbs().maxCoeff();
  if (top == 0.0) return 1;
  Index r = 0;
  for (Index i = 0; i < eigenvalues.size(); ++i)
    if (std::abs(eigenvalues(i)) > 1e-8 * top) ++r;
  return std::max<Index>(r, 1);
}

namespace detail {

struct SortedSpectrum {
  Vector values;
  Matrix vectors;
};

inline SortedSpectrum sorted_spectrum(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(w);
  if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed");
  const Index n = w.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const Vector& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(ev(a)) > std::abs(ev(b)); });
  SortedSpectrum out{Vector(n), Matrix(n, n)};
  for (Index k = 0; k < n; ++k) {
    out.values(k) = ev(order[k]);
    Vector z = solver.eigenvectors().col(order[k]);
    Index arg = 0;
    z.cwiseAbs().maxCoeff(&arg);
    if (z(arg) < 0.0) z = -z;
    out.vectors.col(k) = z;
  }
  // Residual check on the full spectrum.
  const double wnorm = w.norm();
  if (wnorm > 0.0) {
    const double residual =
        (w * out.vectors - out.vectors * out.values.asDiagonal()).colwise().norm().maxCoeff();
    if (residual / wnorm > 1e-10)
      throw ConvergenceError("eigenpair residual " + std::to_string(residual / wnorm) +
                             " exceeds tolerance");
  }
  return out;
}

}  // namespace detail

/// Top-r eigenpairs by |lambda|. Column signs are fixed so the entry of largest
/// magnitude is positive; sign(0) is +1. `rank` defaults to default_rank().
inline SignedEmbedding eigendecompose(const Matrix& w, std::optional<Index> rank = std::nullopt) {
  if (w.rows() != w.cols() || w.rows() == 0) throw DimensionError("eigendecompose needs a square matrix");
  auto spectrum = detail::sorted_spectrum(w);
  const Index r = rank.value_or(default_rank(spectrum.values));
  if (r < 1 || r > w.rows()) throw ValueError("rank budget must lie in [1, n]");
  SignedEmbedding emb;
  emb.eigenvalues = spectrum.values.head(r);
  emb.eigenvectors = spectrum.vectors.leftCols(r);
  emb.signature = emb.eigenvalues.unaryExpr([](double l) { return l < 0.0 ? -1.0 : 1.0; });
  emb.coords = emb.eigenvectors * emb.eigenvalues.cwiseAbs().cwiseSqrt().asDiagonal();
  return emb;
}

inline SignedEmbedding eigendecompose(const DistanceMatrix& w, std::optional<Index> rank = std::nullopt) {
  return eigendecompose(w.values(), rank);
}

/// ||W - reconstruct||_F / ||W||_F (0 when W = 0 and the reconstruction is exact).
inline double relative_reconstruction_error(const Matrix& w, const SignedEmbedding& emb) {
  const double diff = (w - emb.reconstruct()).norm();
  const double wn = w.norm();
  return wn > 0.0 ? diff / wn : diff;
}

/// Squared Frobenius errors of the block approximation perm(W) ~ Hhat S Hhat^T.
struct NystromErrorReport {
  double landmark_error = 0.0;  // W_LL block
  double cross_error = 0.0;     // W_DL block (appears twice in the full matrix)
  double target_error = 0.0;    // hidden W_HH block
  double total = 0.0;           // whole permuted matrix
};

/// `h` holds one row per node in global order.
inline NystromErrorReport nystrom_error(const DistanceMatrix& w, const Matrix& h, const Matrix& s,
                                        std::span<const int> landmark_indices) {
  const Index n = w.size();
  if (h.rows() != n) throw DimensionError("H must have one row per node");
  if (s.rows() != h.cols() || s.cols() != h.cols()) throw DimensionError("S must be K x K");
  const auto obs = extract_observation(w, landmark_indices);
  auto rows_of = [&](const std::vector<int>& idx) {
    Matrix out(static_cast<Index>(idx.size()), h.cols());
    for (Index i = 0; i < out.rows(); ++i) out.row(i) = h.row(idx[i]);
    return out;
  };
  const Matrix hl = rows_of(obs.landmark_indices);
  const Matrix hd = rows_of(obs.target_indices);
  NystromErrorReport rep;
  rep.landmark_error = (obs.landmark_block - hl * s * hl.transpose()).squaredNorm();
  if (!obs.target_indices.empty()) {
    rep.cross_error = (obs.target_block - hd * s * hl.transpose()).squaredNorm();
    const Matrix hidden = w.block(obs.target_indices, obs.target_indices);
    rep.target_error = (hidden - hd * s * hd.transpose()).squaredNorm();
  }
  rep.total = (w.values() - h * s * h.transpose()).squaredNorm();
  return rep;
}

}  // namespace hsh
