#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "hsh/matrix.hpp"

namespace hsh {

struct PlantedDataset {
  Matrix points;  // n x d; empty for latency-only datasets
  Labels truth_labels;
  DistanceMatrix distances;
  double separation = 0.0;
  std::uint64_t seed = 0;
};

struct MatrixSequence {
  std::vector<DistanceMatrix> frames;
  double frame_interval_seconds = 15.7;

  Index node_count() const { return frames.empty() ? 0 : frames.front().size(); }
};

namespace detail {

inline std::mt19937_64 generator_engine(std::uint64_t seed, std::uint32_t stream, std::uint32_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream, index};
  return std::mt19937_64(seq);
}

inline void check_counts(int k, const std::vector<int>& per_cluster) {
  if (k < 2) throw ValueError("need at least two clusters");
  if (static_cast<int>(per_cluster.size()) != k) throw ValueError("per-cluster count list must have K entries");
  for (int c : per_cluster)
    if (c < 1) throw ValueError("every cluster needs at least one node");
}

}  // namespace detail

/// Pairwise Euclidean distances between rows.
inline DistanceMatrix euclidean_distances(const Matrix& points) {
  const Index n = points.rows();
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double v = (points.row(i) - points.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  return DistanceMatrix(std::move(d));
}

/// Gaussian blobs with std `spread` around centroids drawn uniformly from
/// [0, centroid_scale]^d. Separation is min inter-centroid distance over the
/// largest point-to-centroid radius.
inline PlantedDataset synthetic_gaussian(int k, const std::vector<int>& per_cluster, Index dim, double spread,
                                         double centroid_scale, std::uint64_t seed) {
  detail::check_counts(k, per_cluster);
  if (dim < 1) throw ValueError("dimension must be >= 1");
  if (!(spread > 0.0)) throw ValueError("spread must be > 0");
  if (!(centroid_scale > 0.0)) throw ValueError("centroid_scale must be > 0");
  auto rng = detail::generator_engine(seed, 0x67617573u);
  std::uniform_real_distribution<double> uni(0.0, centroid_scale);
  std::normal_distribution<double> gauss(0.0, spread);

  Matrix centroids(k, dim);
  for (Index c = 0; c < k; ++c)
    for (Index j = 0; j < dim; ++j) centroids(c, j) = uni(rng);

  const int n = std::accumulate(per_cluster.begin(), per_cluster.end(), 0);
  PlantedDataset ds;
  ds.seed = seed;
  ds.points.resize(n, dim);
  ds.truth_labels.reserve(static_cast<std::size_t>(n));
  double radius = 0.0;
  Index row = 0;
  for (int c = 0; c < k; ++c)
    for (int m = 0; m < per_cluster[c]; ++m, ++row) {
      for (Index j = 0; j < dim; ++j) ds.points(row, j) = centroids(c, j) + gauss(rng);
      radius = std::max(radius, (ds.points.row(row) - centroids.row(c)).norm());
      ds.truth_labels.push_back(c);
    }
  double min_gap = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < k; ++a)
    for (Index b = a + 1; b < k; ++b) min_gap = std::min(min_gap, (centroids.row(a) - centroids.row(b)).norm());
  ds.separation = radius > 0.0 ? min_gap / radius : std::numeric_limits<double>::infinity();
  ds.distances = euclidean_distances(ds.points);
  return ds;
}

/// 560 points, four clusters of 140, four dimensions.
inline PlantedDataset paper_synthetic(std::uint64_t seed) {
  return synthetic_gaussian(4, {140, 140, 140, 140}, 4, 1.0, 20.0, seed);
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Latency-only fixture: intra-cluster entries uniform in `intra`,
/// inter-cluster in `inter`. Separation is inter.lo / intra.hi.
inline PlantedDataset planted_latency(int k, const std::vector<int>& per_cluster, Range intra, Range inter,
                                      std::uint64_t seed) {
  detail::check_counts(k, per_cluster);
  for (const auto& r : {intra, inter})
    if (!(r.lo >= 0.0) || r.hi < r.lo) throw ValueError("ranges must satisfy 0 <= lo <= hi");
  auto rng = detail::generator_engine(seed, 0x6c6174u);
  PlantedDataset ds;
  ds.seed = seed;
  for (int c = 0; c < k; ++c) ds.truth_labels.insert(ds.truth_labels.end(), per_cluster[c], c);
  const auto n = static_cast<Index>(ds.truth_labels.size());
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const Range r = ds.truth_labels[i] == ds.truth_labels[j] ? intra : inter;
      const double v = std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
      d(i, j) = v;
      d(j, i) = v;
    }
  ds.distances = DistanceMatrix(std::move(d));
  ds.separation = intra.hi > 0.0 ? inter.lo / intra.hi : std::numeric_limits<double>::infinity();
  return ds;
}

/// Base for the dynamic replay preset: 99 nodes in three Gaussian clusters.
inline PlantedDataset dynamic_base(std::uint64_t seed) {
  return synthetic_gaussian(3, {33, 33, 33}, 4, 1.0, 20.0, seed);
}

/// Frames derived independently from `base`: every pair is scaled by 1+u,
/// u ~ U[-jitter, jitter]; a `churn_rate` fraction of nodes per frame gets
/// its whole row redrawn uniformly between the smallest and largest base
/// off-diagonal distance.
inline MatrixSequence dynamic_sequence(const DistanceMatrix& base, int frames, double jitter_fraction,
                                       double churn_rate, std::uint64_t seed) {
  if (frames < 1) throw ValueError("frames must be >= 1");
  if (!(jitter_fraction >= 0.0 && jitter_fraction < 1.0)) throw ValueError("jitter must lie in [0, 1)");
  if (!(churn_rate >= 0.0 && churn_rate <= 1.0)) throw ValueError("churn rate must lie in [0, 1]");
  const Index n = base.size();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      lo = std::min(lo, base(i, j));
      hi = std::max(hi, base(i, j));
    }
  if (n < 2) lo = hi = 0.0;
  const auto churned = static_cast<Index>(std::llround(churn_rate * static_cast<double>(n)));

  MatrixSequence seq;
  seq.frames.reserve(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    auto rng = detail::generator_engine(seed, 0x64796eu, static_cast<std::uint32_t>(t));
    std::uniform_real_distribution<double> jitter(-jitter_fraction, jitter_fraction);
    Matrix m = base.values();
    if (jitter_fraction > 0.0)
      for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
          const double v = m(i, j) * (1.0 + jitter(rng));
          m(i, j) = v;
          m(j, i) = v;
        }
    if (churned > 0) {
      std::vector<int> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::uniform_real_distribution<double> redraw(lo, hi);
      for (Index c = 0; c < churned; ++c) {
        const int i = order[c];
        for (Index j = 0; j < n; ++j) {
          if (j == i) continue;
          const double v = redraw(rng);
          m(i, j) = v;
          m(j, i) = v;
        }
      }
    }
    seq.frames.emplace_back(std::move(m));
  }
  return seq;
}

}  // namespace hsh
