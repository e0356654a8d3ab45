#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "hsh/matrix.hpp"
#include "hsh/symnmf.hpp"

namespace hsh {

/// Kernel K-means objective of a partition, with W used as the Gram matrix:
/// J = tr(W) - sum_k (1/n_k) sum_{i,j in C_k} W[i][j].
struct PartitionObjective {
  Labels labels;
  double j_value = 0.0;
  double trace_term = 0.0;  // tr(Ht^T W Ht), Ht = H (H^T H)^{-1/2}
  std::vector<int> empty_clusters;
};

inline int cluster_count(const Labels& labels) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  return k;
}

/// Relabels clusters in order of first appearance.
inline Labels canonical_labels(const Labels& labels) {
  std::vector<int> map;
  Labels out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l >= static_cast<int>(map.size())) map.resize(static_cast<std::size_t>(l) + 1, -1);
    if (map[l] < 0) map[l] = *std::max_element(map.begin(), map.end()) + 1;
    out[i] = map[l];
  }
  return out;
}

inline bool same_partition(const Labels& a, const Labels& b) {
  return a.size() == b.size() && canonical_labels(a) == canonical_labels(b);
}

inline PartitionObjective kkm_objective(const Matrix& w, const Labels& labels, int k = 0) {
  if (w.rows() != w.cols() || static_cast<Index>(labels.size()) != w.rows())
    throw DimensionError("kkm_objective: labels must match W");
  if (k <= 0) k = cluster_count(labels);
  std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels)
    if (l < 0 || l >= k) throw IndexError("label out of range");
  for (Index i = 0; i < w.rows(); ++i) {
    ++sizes[labels[i]];
    for (Index j = 0; j < w.cols(); ++j)
      if (labels[i] == labels[j]) sums[labels[i]] += w(i, j);
  }
  PartitionObjective out;
  out.labels = labels;
  for (int c = 0; c < k; ++c) {
    if (sizes[c] == 0) {
      out.empty_clusters.push_back(c);
      continue;
    }
    out.trace_term += sums[c] / sizes[c];
  }
  out.j_value = w.trace() - out.trace_term;
  return out;
}

/// Exhaustive minimiser of kkm_objective over partitions into 1..K nonempty
/// blocks. Ties resolve to the lexicographically smallest canonical labeling.
inline Labels brute_force_optimal(const Matrix& w, int k) {
  const Index n = w.rows();
  if (n > 12) throw SizeError("brute force enumeration is limited to n <= 12");
  if (w.cols() != n || n == 0) throw DimensionError("brute_force_optimal needs a square matrix");
  if (k < 1) throw ValueError("K must be >= 1");

  Labels current(static_cast<std::size_t>(n), 0), best;
  std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  double best_trace = -std::numeric_limits<double>::infinity();

  auto recurse = [&](auto&& self, Index i, int used) -> void {
    if (i == n) {
      double trace = 0.0;
      for (int c = 0; c < used; ++c) trace += sums[c] / sizes[c];
      const double tol = 1e-12 * std::max(1.0, std::abs(best_trace));
      if (best.empty() || trace > best_trace + tol) {
        best_trace = trace;
        best = current;
      }
      return;
    }
    const int limit = std::min(used + 1, k);
    for (int c = 0; c < limit; ++c) {
      double add = w(i, i);
      for (Index j = 0; j < i; ++j)
        if (current[j] == c) add += 2.0 * w(i, j);
      current[i] = static_cast<int>(c);
      sums[c] += add;
      ++sizes[c];
      self(self, i + 1, std::max(used, c + 1));
      sums[c] -= add;
      --sizes[c];
    }
  };
  recurse(recurse, 0, 0);
  return best;
}

struct EquivalenceReport {
  bool match = false;
  Labels nmf_labels;
  Labels oracle_labels;
  double nmf_j = 0.0;
  double oracle_j = 0.0;
  double j_gap = 0.0;  // nmf_j - oracle_j
};

/// Compares best-of-restarts symmetric NMF labels against the exhaustive
/// kernel K-means optimum, up to label permutation.
inline EquivalenceReport theorem1_check(const Matrix& w, int k, const FactorizeConfig& cfg) {
  if (w.rows() > 12) throw SizeError("theorem1_check is limited to n <= 12");
  EquivalenceReport rep;
  const auto fit = factorize(w, k, cfg);
  rep.nmf_labels = canonical_labels(assign_labels(fit.factors.H).labels);
  rep.oracle_labels = brute_force_optimal(w, k);
  rep.nmf_j = kkm_objective(w, rep.nmf_labels, k).j_value;
  rep.oracle_j = kkm_objective(w, rep.oracle_labels, k).j_value;
  rep.j_gap = rep.nmf_j - rep.oracle_j;
  rep.match = same_partition(rep.nmf_labels, rep.oracle_labels);
  return rep;
}

// ---------------------------------------------------------------------------
// Lloyd's algorithm with k-means++ seeding.

struct KMeansResult {
  Labels labels;
  Matrix centroids;
  double inertia = 0.0;
  int best_restart = 0;
};

namespace detail {

inline KMeansResult lloyd_once(const Matrix& points, int k, std::mt19937_64& rng, int max_iters) {
  const Index n = points.rows();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix centers(k, points.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  centers.row(0) = points.row(first(rng));
  Vector d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index chosen = 0;
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (chosen = 0; chosen < n - 1; ++chosen) {
        target -= d2(chosen);
        if (target < 0.0) break;
      }
    } else {
      chosen = first(rng);
    }
    centers.row(c) = points.row(chosen);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  Labels labels(static_cast<std::size_t>(n), -1);
  Vector dist(n);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = (points.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      dist(i) = bd;
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(labels[i]) += points.row(i);
      ++counts[labels[i]];
    }
    bool reseeded = false;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / counts[c];
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      Index far = 0;
      dist.maxCoeff(&far);
      centers.row(c) = points.row(far);
      dist(far) = 0.0;
      reseeded = true;
    }
    if (!changed && !reseeded) break;
  }
  KMeansResult res;
  res.inertia = 0.0;
  for (Index i = 0; i < n; ++i) {
    int best = 0;
    double bd = (points.row(i) - centers.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
      const double d = (points.row(i) - centers.row(c)).squaredNorm();
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    labels[i] = best;
    res.inertia += bd;
  }
  res.labels = std::move(labels);
  res.centroids = std::move(centers);
  return res;
}

}  // namespace detail

/// Best of `restarts` Lloyd runs by within-cluster sum of squares.
inline KMeansResult lloyd_kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed,
                                 int max_iters = 300) {
  if (k < 1 || points.rows() < k) throw ValueError("lloyd_kmeans needs 1 <= K <= n");
  if (restarts < 1) throw ValueError("restarts must be >= 1");
  KMeansResult best;
  for (int r = 0; r < restarts; ++r) {
    auto rng = detail::restart_engine(seed ^ 0x6b6d65616e73ull, r);
    auto run = detail::lloyd_once(points, k, rng, max_iters);
    run.best_restart = r;
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

}  // namespace hsh
