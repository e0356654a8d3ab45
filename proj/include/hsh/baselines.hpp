#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hsh/kernel_kmeans.hpp"
#include "hsh/matrix.hpp"
#include "hsh/pipeline.hpp"
#include "hsh/spectral.hpp"
#include "hsh/symnmf.hpp"

namespace hsh {

/// Output shared by every clustering method.
struct ClusteringResult {
  std::string method;
  Labels labels;
  std::uint64_t seed = 0;
  int restarts = 0;
  std::vector<int> landmark_indices;
  std::optional<Matrix> s_matrix;
  ValidityReport validity;
  std::optional<double> objective;
  std::optional<double> embedding_error;
};

inline ClusteringResult to_clustering_result(const HshResult& r, int restarts) {
  ClusteringResult out;
  out.method = "hsh";
  out.labels = r.labels;
  out.seed = r.seed;
  out.restarts = restarts;
  out.landmark_indices = r.landmark_indices;
  out.s_matrix = r.landmark_factors().S;
  out.validity = r.validity;
  out.objective = r.landmark_fit.objective;
  return out;
}

/// Symmetric NMF on the full matrix.
inline ClusteringResult centralized_nmf(const DistanceMatrix& w, Index k, const FactorizeConfig& cfg) {
  const auto fit = factorize(w, k, cfg);
  ClusteringResult out;
  out.method = "centralized";
  out.labels = assign_labels(fit.factors.H).labels;
  out.seed = cfg.seed;
  out.restarts = cfg.restarts;
  out.s_matrix = fit.factors.S;
  out.validity = validity_gaps(fit.factors.S);
  out.objective = fit.objective;
  return out;
}

/// Lloyd K-means on rows of U |Q|^{1/2} for the top-r singular triples.
inline ClusteringResult svd_kmeans(const DistanceMatrix& w, Index rank, int k, const FactorizeConfig& cfg) {
  if (rank < 1 || rank > w.size()) throw ValueError("svd rank must lie in [1, n]");
  const auto emb = eigendecompose(w, rank);
  const auto km = lloyd_kmeans(emb.coords, k, cfg.restarts, cfg.seed);
  ClusteringResult out;
  out.method = "svd";
  out.labels = km.labels;
  out.seed = cfg.seed;
  out.restarts = cfg.restarts;
  out.objective = km.inertia;
  return out;
}

/// Lloyd K-means on raw coordinates (the reference clustering).
inline ClusteringResult origin_kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed) {
  const auto km = lloyd_kmeans(points, k, restarts, seed);
  ClusteringResult out;
  out.method = "origin";
  out.labels = km.labels;
  out.seed = seed;
  out.restarts = restarts;
  out.objective = km.inertia;
  return out;
}

// ---------------------------------------------------------------------------
// Vivaldi network coordinates (Euclidean, no height vector).

/// Measured links per node, in global indices.
struct MeasurementGraph {
  struct Link {
    int peer;
    double distance;
  };
  std::vector<std::vector<Link>> links;

  Index node_count() const noexcept { return static_cast<Index>(links.size()); }

  static MeasurementGraph full(const DistanceMatrix& w) {
    MeasurementGraph g;
    g.links.resize(static_cast<std::size_t>(w.size()));
    for (Index i = 0; i < w.size(); ++i)
      for (Index j = 0; j < w.size(); ++j)
        if (i != j) g.links[i].push_back({static_cast<int>(j), w(i, j)});
    return g;
  }

  /// Landmark-landmark and target-landmark links only.
  static MeasurementGraph observed(const PartialObservation& obs) {
    obs.validate();
    MeasurementGraph g;
    g.links.resize(static_cast<std::size_t>(obs.node_count()));
    const auto& lm = obs.landmark_indices;
    const auto& tg = obs.target_indices;
    for (std::size_t a = 0; a < lm.size(); ++a)
      for (std::size_t b = 0; b < lm.size(); ++b)
        if (a != b) g.links[lm[a]].push_back({lm[b], obs.landmark_block(a, b)});
    for (std::size_t t = 0; t < tg.size(); ++t)
      for (std::size_t a = 0; a < lm.size(); ++a) {
        const double d = obs.target_block(t, a);
        g.links[tg[t]].push_back({lm[a], d});
        g.links[lm[a]].push_back({tg[t], d});
      }
    return g;
  }
};

struct VivaldiConfig {
  Index dim = 4;
  int iters = 200;  // sweeps; each node performs one update per sweep
  std::uint64_t seed = 0;
  double cc = 0.25;  // step constant
  double ce = 0.25;  // error smoothing constant
};

struct CoordinateEmbedding {
  Matrix coords;
  double embedding_error = 0.0;  // relative stress over measured links
  std::string method = "vivaldi";
};

inline double relative_stress(const MeasurementGraph& g, const Matrix& coords) {
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < g.node_count(); ++i)
    for (const auto& l : g.links[i]) {
      const double e = (coords.row(i) - coords.row(l.peer)).norm() - l.distance;
      num += e * e;
      den += l.distance * l.distance;
    }
  return den > 0.0 ? num / den : num;
}

inline CoordinateEmbedding vivaldi_embed(const MeasurementGraph& g, const VivaldiConfig& cfg) {
  if (cfg.dim < 1) throw ValueError("vivaldi dimension must be >= 1");
  if (cfg.iters < 1) throw ValueError("vivaldi iterations must be >= 1");
  const Index n = g.node_count();
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 0x7669u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> init(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  CoordinateEmbedding emb;
  emb.coords.resize(n, cfg.dim);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < cfg.dim; ++k) emb.coords(i, k) = init(rng);
  std::vector<double> error(static_cast<std::size_t>(n), 1.0);

  RowVector dir(cfg.dim);
  for (int sweep = 0; sweep < cfg.iters; ++sweep) {
    for (Index i = 0; i < n; ++i) {
      const auto& links = g.links[i];
      if (links.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, links.size() - 1);
      const auto& link = links[pick(rng)];
      const Index j = link.peer;
      dir = emb.coords.row(i) - emb.coords.row(j);
      const double dist = dir.norm();
      if (dist > 0.0) {
        dir /= dist;
      } else {
        for (Index k = 0; k < cfg.dim; ++k) dir(k) = gauss(rng);
        dir.normalize();
      }
      const double total = error[i] + error[j];
      const double weight = total > 0.0 ? error[i] / total : 0.5;
      const double sample_err =
          link.distance > 0.0 ? std::min(1.0, std::abs(dist - link.distance) / link.distance)
                              : (dist > 0.0 ? 1.0 : 0.0);
      error[i] = sample_err * cfg.ce * weight + error[i] * (1.0 - cfg.ce * weight);
      const double delta = cfg.cc * weight;
      emb.coords.row(i) += delta * (link.distance - dist) * dir;
    }
  }
  emb.embedding_error = relative_stress(g, emb.coords);
  return emb;
}

/// Vivaldi coordinates from the observed links, then Lloyd K-means.
inline ClusteringResult vivaldi_kmeans(const PartialObservation& obs, int k, const VivaldiConfig& vcfg,
                                       int restarts) {
  const auto emb = vivaldi_embed(MeasurementGraph::observed(obs), vcfg);
  const auto km = lloyd_kmeans(emb.coords, k, restarts, vcfg.seed);
  ClusteringResult out;
  out.method = "vivaldi";
  out.labels = km.labels;
  out.seed = vcfg.seed;
  out.restarts = restarts;
  out.landmark_indices = obs.landmark_indices;
  out.embedding_error = emb.embedding_error;
  return out;
}

}  // namespace hsh
