#pragma once

// Test-only reference implementations and fixtures. Nothing here calls into
// the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "hsh/hsh.hpp"

namespace testing_support {

using hsh::Index;
using hsh::Labels;
using hsh::Matrix;

inline std::mt19937_64 engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x7e57u};
  return std::mt19937_64(seq);
}

/// Symmetric, nonnegative, zero diagonal, entries uniform in [lo, hi].
inline Matrix random_distance(Index n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  auto rng = engine(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) m(i, j) = m(j, i) = u(rng);
  return m;
}

inline Matrix random_nonneg(Index r, Index c, std::uint64_t seed) {
  auto rng = engine(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

inline Labels random_labels(Index n, int k, std::uint64_t seed) {
  auto rng = engine(seed);
  std::uniform_int_distribution<int> u(0, k - 1);
  Labels l(static_cast<std::size_t>(n));
  for (auto& x : l) x = u(rng);
  // Make sure every cluster is used, so at least two are nonempty.
  for (int c = 0; c < k && c < n; ++c) l[static_cast<std::size_t>(c)] = c;
  std::shuffle(l.begin(), l.end(), rng);
  return l;
}

/// Adjusted Rand index from the contingency table.
inline double adjusted_rand(const Labels& a, const Labels& b) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double sum_joint = 0, sum_a = 0, sum_b = 0;
  for (auto& [_, v] : joint) sum_joint += c2(v);
  for (auto& [_, v] : ra) sum_a += c2(v);
  for (auto& [_, v] : rb) sum_b += c2(v);
  const double total = c2(static_cast<double>(a.size()));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_joint - expected) / (max_index - expected);
}

/// Naive double loop: pooled b, a = 0 for singletons.
inline void naive_ab(const Matrix& d, const Labels& l, std::vector<double>& a, std::vector<double>& b) {
  const std::size_t n = l.size();
  a.assign(n, 0.0);
  b.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double in = 0, out = 0;
    int nin = 0, nout = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (l[j] == l[i]) {
        in += d(i, j);
        ++nin;
      } else {
        out += d(i, j);
        ++nout;
      }
    }
    a[i] = nin ? in / nin : 0.0;
    b[i] = nout ? out / nout : 0.0;
  }
}

inline std::vector<double> naive_silhouette(const Matrix& d, const Labels& l) {
  std::vector<double> a, b, s;
  naive_ab(d, l, a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double m = std::max(a[i], b[i]);
    s.push_back(m == 0 ? 0.0 : (b[i] - a[i]) / m);
  }
  return s;
}

inline std::vector<double> naive_gain(const Matrix& d, const Labels& l) {
  std::vector<double> a, b, g;
  naive_ab(d, l, a, b);
  for (std::size_t i = 0; i < a.size(); ++i)
    g.push_back(a[i] > 0 ? b[i] / a[i] : std::numeric_limits<double>::infinity());
  return g;
}

/// sum_ij (W - H S H^T)_ij^2, entry by entry.
inline double naive_objective(const Matrix& w, const Matrix& h, const Matrix& s) {
  double total = 0;
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j) {
      double approx = 0;
      for (Index p = 0; p < s.rows(); ++p)
        for (Index q = 0; q < s.cols(); ++q) approx += h(i, p) * s(p, q) * h(j, q);
      total += (w(i, j) - approx) * (w(i, j) - approx);
    }
  return total;
}

/// Kernel K-means objective straight from the definition.
inline double naive_kkm(const Matrix& w, const Labels& l) {
  double trace = 0;
  for (Index i = 0; i < w.rows(); ++i) trace += w(i, i);
  std::map<int, std::vector<Index>> members;
  for (std::size_t i = 0; i < l.size(); ++i) members[l[i]].push_back(static_cast<Index>(i));
  for (auto& [_, m] : members) {
    double s = 0;
    for (Index i : m)
      for (Index j : m) s += w(i, j);
    trace -= s / static_cast<double>(m.size());
  }
  return trace;
}

/// Plain gradient descent on ||w - p A||^2 for a K x L basis A.
inline hsh::RowVector gd_least_squares(const hsh::RowVector& w, const Matrix& a, int steps) {
  const Matrix gram = a * a.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double step = 1.0 / (2.0 * eig.eigenvalues().maxCoeff());
  hsh::RowVector p = hsh::RowVector::Zero(a.rows());
  for (int t = 0; t < steps; ++t) p -= step * 2.0 * (p * a - w) * a.transpose();
  return p;
}

/// Cluster membership matrix, one column per label, unit-norm columns.
inline Matrix normalized_indicator(const Labels& l, int k) {
  Matrix h = Matrix::Zero(static_cast<Index>(l.size()), k);
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int x : l) ++sizes[x];
  for (std::size_t i = 0; i < l.size(); ++i) h(static_cast<Index>(i), l[i]) = 1.0 / std::sqrt(sizes[l[i]]);
  return h;
}

inline std::vector<int> random_permutation(Index n, std::uint64_t seed) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  auto rng = engine(seed);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace testing_support
