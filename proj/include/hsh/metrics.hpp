#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <vector>

#include "hsh/matrix.hpp"

namespace hsh {

enum class SilhouetteVariant {
  /// b_i averages over every node outside i's cluster.
  pooled,
  /// Classical form: b_i is the smallest mean distance to another cluster.
  nearest_cluster,
};

namespace detail {

struct Separation {
  std::vector<double> a;  // mean intra-cluster distance (0 for singletons)
  std::vector<double> b;  // mean inter-cluster distance
};

inline Separation separation(const Matrix& d, const Labels& labels, SilhouetteVariant variant) {
  const Index n = d.rows();
  if (d.cols() != n || static_cast<Index>(labels.size()) != n)
    throw DimensionError("labels must have one entry per node");
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw IndexError("negative label");
    k = std::max(k, l + 1);
  }
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++sizes[l];
  if (std::count_if(sizes.begin(), sizes.end(), [](int s) { return s > 0; }) < 2)
    throw ValueError("metrics need at least two nonempty clusters");

  Separation out{std::vector<double>(n), std::vector<double>(n)};
  std::vector<double> per_cluster(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) {
    std::fill(per_cluster.begin(), per_cluster.end(), 0.0);
    for (Index j = 0; j < n; ++j) per_cluster[labels[j]] += d(i, j);
    const int own = labels[i];
    out.a[i] = sizes[own] > 1 ? per_cluster[own] / (sizes[own] - 1) : 0.0;
    if (variant == SilhouetteVariant::pooled) {
      double sum = 0.0;
      for (int c = 0; c < k; ++c)
        if (c != own) sum += per_cluster[c];
      out.b[i] = sum / static_cast<double>(n - sizes[own]);
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c)
        if (c != own && sizes[c] > 0) best = std::min(best, per_cluster[c] / sizes[c]);
      out.b[i] = best;
    }
  }
  return out;
}

}  // namespace detail

/// s_i = (b_i - a_i) / max(a_i, b_i); 0 when both are 0.
inline std::vector<double> silhouette(const Matrix& d, const Labels& labels,
                                      SilhouetteVariant variant = SilhouetteVariant::pooled) {
  const auto sep = detail::separation(d, labels, variant);
  std::vector<double> s(sep.a.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double m = std::max(sep.a[i], sep.b[i]);
    s[i] = m > 0.0 ? (sep.b[i] - sep.a[i]) / m : 0.0;
  }
  return s;
}

inline std::vector<double> silhouette(const DistanceMatrix& d, const Labels& labels,
                                      SilhouetteVariant variant = SilhouetteVariant::pooled) {
  return silhouette(d.values(), labels, variant);
}

/// g_i = b_i / a_i; singleton nodes (a_i = 0) get +infinity.
inline std::vector<double> gain_ratio(const Matrix& d, const Labels& labels) {
  const auto sep = detail::separation(d, labels, SilhouetteVariant::pooled);
  std::vector<double> g(sep.a.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = sep.a[i] > 0.0 ? sep.b[i] / sep.a[i] : std::numeric_limits<double>::infinity();
  return g;
}

inline std::vector<double> gain_ratio(const DistanceMatrix& d, const Labels& labels) {
  return gain_ratio(d.values(), labels);
}

/// Lower median: element (n-1)/2 of the sorted values.
inline double median(std::vector<double> values) {
  if (values.empty()) throw ValueError("median of empty vector");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

struct Summary {
  double median = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> cdf_samples;  // sorted ascending
};

/// Median with a seeded 95% bootstrap interval (1000 resamples).
inline Summary summarize(const std::vector<double>& values, std::uint64_t seed = 0,
                         int resamples = 1000) {
  if (values.empty()) throw ValueError("summarize needs at least one value");
  for (double v : values)
    if (!std::isfinite(v)) throw ValueError("summarize needs finite values");
  Summary out;
  out.cdf_samples = values;
  std::sort(out.cdf_samples.begin(), out.cdf_samples.end());
  out.median = out.cdf_samples[(out.cdf_samples.size() - 1) / 2];

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x62u};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> medians(static_cast<std::size_t>(resamples));
  std::vector<double> sample(values.size());
  for (auto& m : medians) {
    for (auto& x : sample) x = values[pick(rng)];
    m = median(sample);
  }
  std::sort(medians.begin(), medians.end());
  const auto at = [&](double q) {
    return medians[static_cast<std::size_t>(std::floor(q * static_cast<double>(medians.size() - 1)))];
  };
  out.ci_low = at(0.025);
  out.ci_high = at(0.975);
  return out;
}

struct QualityReport {
  std::vector<double> silhouette;
  std::vector<double> gain_ratio;
  Summary silhouette_summary;
  /// Over finite gain ratios only; median is NaN when every node is excluded.
  Summary gain_summary;
  std::size_t gain_excluded = 0;
  std::map<int, double> cluster_median_silhouette;
  std::map<int, double> cluster_median_gain;

  double median_silhouette() const { return silhouette_summary.median; }
  double median_gain() const { return gain_summary.median; }
};

inline QualityReport evaluate(const Matrix& d, const Labels& labels, std::uint64_t seed = 0) {
  QualityReport rep;
  rep.silhouette = silhouette(d, labels);
  rep.gain_ratio = gain_ratio(d, labels);
  rep.silhouette_summary = summarize(rep.silhouette, seed);
  std::vector<double> finite;
  for (double g : rep.gain_ratio) {
    if (std::isfinite(g))
      finite.push_back(g);
    else
      ++rep.gain_excluded;
  }
  if (finite.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.gain_summary = Summary{nan, nan, nan, {}};
  } else {
    rep.gain_summary = summarize(finite, seed);
  }
  std::map<int, std::vector<double>> sil, gain;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sil[labels[i]].push_back(rep.silhouette[i]);
    if (std::isfinite(rep.gain_ratio[i])) gain[labels[i]].push_back(rep.gain_ratio[i]);
  }
  for (auto& [c, v] : sil) rep.cluster_median_silhouette[c] = median(v);
  for (auto& [c, v] : gain) rep.cluster_median_gain[c] = median(v);
  return rep;
}

inline QualityReport evaluate(const DistanceMatrix& d, const Labels& labels, std::uint64_t seed = 0) {
  return evaluate(d.values(), labels, seed);
}

/// Two-column CDF: "value,cum_fraction", ascending.
inline void write_cdf(std::ostream& out, const std::vector<double>& sorted_values) {
  out << "value,cum_fraction\n";
  const double n = static_cast<double>(sorted_values.size());
  for (std::size_t i = 0; i < sorted_values.size(); ++i)
    out << format_double(sorted_values[i]) << ',' << format_double(static_cast<double>(i + 1) / n)
        << '\n';
}

}  // namespace hsh
