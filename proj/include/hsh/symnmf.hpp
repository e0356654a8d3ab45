#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hsh/matrix.hpp"

namespace hsh {

/// Nonnegative tri-factorization W ~ H S H^T.
struct FactorPair {
  Matrix H;  // m x K
  Matrix S;  // K x K

  Index clusters() const noexcept { return H.cols(); }
};

enum class UpdateRule {
  /// H <- H * sqrt(WHS / (H H^T W H S)).
  classic,
  /// H <- H * sqrt(WHS / (H S H^T H S)), the gradient-ratio form.
  gradient,
};

struct FactorizeConfig {
  int max_iters = 500;
  double rel_tol = 1e-6;
  int restarts = 20;
  std::uint64_t seed = 0;
  double epsilon_guard = 1e-12;
  UpdateRule rule = UpdateRule::classic;
  /// Any step that would raise the objective is retried: a classic H step
  /// first falls back to the gradient-ratio step, then the exponent is halved
  /// up to 30 times. Steps that still fail leave the factor unchanged.
  bool monotone_guard = true;

  void validate() const {
    if (max_iters < 1) throw ValueError("max_iters must be >= 1");
    if (!(rel_tol > 0.0)) throw ValueError("rel_tol must be > 0");
    if (restarts < 1) throw ValueError("restarts must be >= 1");
    if (!(epsilon_guard > 0.0)) throw ValueError("epsilon_guard must be > 0");
  }
};

struct FactorizeResult {
  FactorPair factors;
  double objective = 0.0;
  /// Objective before the first update and after every iteration of the
  /// selected restart.
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  int best_restart = 0;
  std::vector<double> restart_objectives;
  /// Columns of H that are identically zero.
  std::vector<int> empty_columns;
  int fallback_steps = 0;  // classic H steps replaced by the gradient-ratio step
  int damped_steps = 0;
  int rejected_steps = 0;
};

/// Called after every iteration with (restart, iteration, H, S).
using IterationObserver = std::function<void(int, int, const Matrix&, const Matrix&)>;

/// ||W - H S H^T||_F^2, computed densely.
inline double objective(const Matrix& w, const FactorPair& fp) {
  if (fp.H.rows() != w.rows() || w.rows() != w.cols() || fp.S.rows() != fp.H.cols() ||
      fp.S.cols() != fp.H.cols())
    throw DimensionError("objective: shape mismatch");
  return (w - fp.H * fp.S * fp.H.transpose()).squaredNorm();
}

struct LabelAssignment {
  Labels labels;
  std::size_t zero_rows = 0;
};

/// Row-wise argmax; ties go to the lowest column, all-zero rows get label 0.
inline LabelAssignment assign_labels(const Matrix& h) {
  LabelAssignment out;
  out.labels.resize(static_cast<std::size_t>(h.rows()), 0);
  for (Index i = 0; i < h.rows(); ++i) {
    Index best = 0;
    bool nonzero = false;
    for (Index k = 0; k < h.cols(); ++k) {
      if (h(i, k) != 0.0) nonzero = true;
      if (h(i, k) > h(i, best)) best = k;
    }
    if (!nonzero) ++out.zero_rows;
    out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

struct ClusterValidity {
  double diagonal = 0.0;
  double max_offdiagonal = 0.0;
  double gap = 0.0;
  bool separated = false;
};

struct ValidityReport {
  std::vector<ClusterValidity> clusters;

  std::size_t separated_count() const {
    std::size_t c = 0;
    for (const auto& v : clusters) c += v.separated;
    return c;
  }
};

/// Per row of S: diagonal minus the largest off-diagonal entry.
inline ValidityReport validity_gaps(const Matrix& s) {
  if (s.rows() != s.cols()) throw DimensionError("S must be square");
  ValidityReport rep;
  for (Index i = 0; i < s.rows(); ++i) {
    ClusterValidity v;
    v.diagonal = s(i, i);
    v.max_offdiagonal = s.rows() > 1 ? -std::numeric_limits<double>::infinity() : 0.0;
    for (Index j = 0; j < s.cols(); ++j)
      if (j != i) v.max_offdiagonal = std::max(v.max_offdiagonal, s(i, j));
    v.gap = v.diagonal - v.max_offdiagonal;
    v.separated = v.gap > 0.0;
    rep.clusters.push_back(v);
  }
  return rep;
}

namespace detail {

inline std::mt19937_64 restart_engine(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart), 0x6e6d66u};
  return std::mt19937_64(seq);
}

// ||W||^2 - 2 <W, HSH^T> + ||HSH^T||^2 from the small products.
inline double expanded_objective(double w_sq, const Matrix& htwh, const Matrix& gram, const Matrix& s) {
  const double cross = (htwh.array() * s.transpose().array()).sum();
  const double fit = (s.transpose() * gram * s * gram).trace();
  return w_sq - 2.0 * cross + fit;
}

inline void check_factorize_input(const Matrix& w, Index k) {
  validate_distance_values(w);
  if (k < 2 || k > w.rows())
    throw ValueError("cluster count must satisfy 2 <= K <= m (K=" + std::to_string(k) +
                     ", m=" + std::to_string(w.rows()) + ")");
  if (w.isZero(0.0)) throw DegenerateError("cannot factorize the zero matrix");
}

}  // namespace detail

/// Random start: H ~ U(0,1] * sqrt(mean(W)/K), S ~ U(0,1] * mean(W), S symmetrized.
inline FactorPair initial_factors(const Matrix& w, Index k, std::uint64_t seed, int restart = 0) {
  auto rng = detail::restart_engine(seed, restart);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&] { return 1.0 - unit(rng); };  // (0, 1]
  const double mean = w.mean();
  const double h_scale = std::sqrt(mean / static_cast<double>(k));
  FactorPair fp{Matrix(w.rows(), k), Matrix(k, k)};
  for (Index j = 0; j < w.rows(); ++j)
    for (Index c = 0; c < k; ++c) fp.H(j, c) = draw() * h_scale;
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) fp.S(a, b) = draw() * mean;
  fp.S = (0.5 * (fp.S + fp.S.transpose())).eval();
  return fp;
}

/// One multiplicative-update run from `init`.
inline FactorizeResult factorize_from(const Matrix& w, FactorPair init, const FactorizeConfig& cfg,
                                      const IterationObserver& observer = {}, int restart = 0) {
  cfg.validate();
  if (init.H.rows() != w.rows() || init.S.rows() != init.H.cols() || init.S.cols() != init.H.cols())
    throw DimensionError("initial factors do not match W");
  if ((init.H.array() < 0.0).any() || (init.S.array() < 0.0).any())
    throw ValueError("initial factors must be nonnegative");

  const double eps = cfg.epsilon_guard;
  const double w_sq = w.squaredNorm();
  constexpr int kMaxHalvings = 30;

  Matrix h = std::move(init.H);
  Matrix s = std::move(init.S);
  Matrix wh = w * h;
  Matrix gram = h.transpose() * h;
  Matrix htwh = h.transpose() * wh;
  double current = detail::expanded_objective(w_sq, htwh, gram, s);

  FactorizeResult res;
  res.trace.push_back(current);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const double before = current;

    // H step.
    const Matrix whs = wh * s;
    const Matrix denom = cfg.rule == UpdateRule::classic ? Matrix(h * (h.transpose() * whs))
                                                       : Matrix(h * (s * gram * s));
    const Matrix ratio =
        (whs.array().max(0.0) / denom.array().max(eps)).sqrt().matrix();
    {
      Matrix cand = h.cwiseProduct(ratio);
      Matrix cand_wh = w * cand;
      Matrix cand_gram = cand.transpose() * cand;
      Matrix cand_htwh = cand.transpose() * cand_wh;
      double cand_obj = detail::expanded_objective(w_sq, cand_htwh, cand_gram, s);
      Matrix step = ratio;
      if (cfg.monotone_guard && cand_obj > current && cfg.rule == UpdateRule::classic) {
        // Fall back to the gradient-ratio step before damping.
        step = (whs.array().max(0.0) / Matrix(h * (s * gram * s)).array().max(eps)).sqrt().matrix();
        cand = h.cwiseProduct(step);
        cand_wh = w * cand;
        cand_gram = cand.transpose() * cand;
        cand_htwh = cand.transpose() * cand_wh;
        cand_obj = detail::expanded_objective(w_sq, cand_htwh, cand_gram, s);
        ++res.fallback_steps;
      }
      if (cfg.monotone_guard && cand_obj > current) {
        double power = 1.0;
        int halvings = 0;
        while (cand_obj > current && halvings < kMaxHalvings) {
          power *= 0.5;
          ++halvings;
          cand = h.cwiseProduct(step.array().pow(power).matrix());
          cand_wh = w * cand;
          cand_gram = cand.transpose() * cand;
          cand_htwh = cand.transpose() * cand_wh;
          cand_obj = detail::expanded_objective(w_sq, cand_htwh, cand_gram, s);
        }
        ++res.damped_steps;
        if (cand_obj > current) {
          ++res.rejected_steps;
          cand_obj = current;
          cand = h;
          cand_wh = wh;
          cand_gram = gram;
          cand_htwh = htwh;
        }
      }
      h = std::move(cand);
      wh = std::move(cand_wh);
      gram = std::move(cand_gram);
      htwh = std::move(cand_htwh);
      current = cand_obj;
    }

    // S step.
    {
      const Matrix sratio =
          (htwh.array().max(0.0) / (gram * s * gram).array().max(eps)).sqrt().matrix();
      Matrix cand = s.cwiseProduct(sratio);
      double cand_obj = detail::expanded_objective(w_sq, htwh, gram, cand);
      if (cfg.monotone_guard && cand_obj > current) {
        double power = 1.0;
        int halvings = 0;
        while (cand_obj > current && halvings < kMaxHalvings) {
          power *= 0.5;
          ++halvings;
          cand = s.cwiseProduct(sratio.array().pow(power).matrix());
          cand_obj = detail::expanded_objective(w_sq, htwh, gram, cand);
        }
        ++res.damped_steps;
        if (cand_obj > current) {
          ++res.rejected_steps;
          cand = s;
          cand_obj = current;
        }
      }
      s = std::move(cand);
      current = cand_obj;
    }

    res.trace.push_back(current);
    res.iterations = it;
    if (observer) observer(restart, it, h, s);
    if (before <= 0.0 || before - current < cfg.rel_tol * before) {
      res.converged = true;
      break;
    }
  }

  res.factors = FactorPair{std::move(h), std::move(s)};
  res.objective = objective(w, res.factors);
  for (Index c = 0; c < res.factors.H.cols(); ++c)
    if (res.factors.H.col(c).isZero(0.0)) res.empty_columns.push_back(static_cast<int>(c));
  res.best_restart = restart;
  res.restart_objectives = {res.objective};
  return res;
}

/// Best of cfg.restarts seeded runs, selected by (objective, restart index).
inline FactorizeResult factorize(const Matrix& w, Index k, const FactorizeConfig& cfg,
                                 const IterationObserver& observer = {}) {
  cfg.validate();
  detail::check_factorize_input(w, k);
  FactorizeResult best;
  std::vector<double> objectives;
  for (int r = 0; r < cfg.restarts; ++r) {
    auto run = factorize_from(w, initial_factors(w, k, cfg.seed, r), cfg, observer, r);
    objectives.push_back(run.objective);
    if (r == 0 || run.objective < best.objective) best = std::move(run);
  }
  best.restart_objectives = std::move(objectives);
  return best;
}

inline FactorizeResult factorize(const DistanceMatrix& w, Index k, const FactorizeConfig& cfg,
                                 const IterationObserver& observer = {}) {
  return factorize(w.values(), k, cfg, observer);
}

}  // namespace hsh
