#include <gtest/gtest.h>

#include "support.hpp"

using namespace hsh;
namespace ts = testing_support;

namespace {

Matrix two_pair_blocks() {
  Matrix w = Matrix::Zero(4, 4);
  w(0, 1) = w(1, 0) = 1;
  w(2, 3) = w(3, 2) = 1;
  return w;
}

FactorizeConfig quick(std::uint64_t seed = 0, int restarts = 5) {
  FactorizeConfig cfg;
  cfg.seed = seed;
  cfg.restarts = restarts;
  return cfg;
}

}  // namespace

TEST(Factorize, PureTwoPairBlocksTie) {
  // Pairs {0,1}, {2,3}. The pair partition (diagonal S) and the crossed
  // assignment {0,2} / {1,3} with off-diagonal S both reach ||W - HSH^T||^2 = 2,
  // so the fit cannot prefer one labeling. Only the kernel k-means optimum is
  // unique here.
  const Matrix w = two_pair_blocks();
  FactorizeConfig cfg;
  cfg.restarts = 20;
  const auto fit = factorize(w, 2, cfg);
  EXPECT_NEAR(fit.objective, 2.0, 1e-4);
  EXPECT_TRUE(same_partition(brute_force_optimal(w, 2), {0, 0, 1, 1}));
  const Matrix h_pairs = ts::normalized_indicator({0, 0, 1, 1}, 2);
  Matrix h_cross = Matrix::Zero(4, 2);
  h_cross(0, 0) = h_cross(2, 0) = h_cross(1, 1) = h_cross(3, 1) = 1.0 / std::sqrt(2.0);
  Matrix s_cross(2, 2);
  s_cross << 0, 1, 1, 0;
  EXPECT_NEAR(objective(w, {h_pairs, Matrix::Identity(2, 2)}), 2.0, 1e-12);
  EXPECT_NEAR(objective(w, {h_cross, s_cross}), 2.0, 1e-12);
}

TEST(Factorize, OrthonormalPlantedFactorsAreFixedPoint) {
  const Labels truth{0, 0, 1, 1, 1, 2, 2};
  const Matrix h0 = ts::normalized_indicator(truth, 3);
  Matrix s0(3, 3);
  s0 << 2, 1, 3, 1, 4, 2, 3, 2, 5;
  const Matrix w = h0 * s0 * h0.transpose();
  for (auto rule : {UpdateRule::classic, UpdateRule::gradient}) {
    FactorizeConfig cfg;
    cfg.rule = rule;
    cfg.max_iters = 25;
    const auto fit = factorize_from(w, FactorPair{h0, s0}, cfg);
    EXPECT_LE((fit.factors.H - h0).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((fit.factors.S - s0).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Factorize, GradientRuleFixedPointForGeneralFactors) {
  const Matrix h0 = ts::random_nonneg(6, 2, 3) + Matrix::Constant(6, 2, 0.1);
  Matrix s0(2, 2);
  s0 << 1.5, 0.4, 0.4, 2.0;
  const Matrix w = h0 * s0 * h0.transpose();
  FactorizeConfig cfg;
  cfg.rule = UpdateRule::gradient;
  cfg.max_iters = 25;
  const auto fit = factorize_from(w, FactorPair{h0, s0}, cfg);
  EXPECT_LE((fit.factors.H - h0).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((fit.factors.S - s0).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Factorize, SyntheticTraceNonIncreasing) {
  const auto ds = paper_synthetic(0);
  FactorizeConfig cfg;
  cfg.restarts = 1;
  cfg.max_iters = 200;
  double prev = std::numeric_limits<double>::infinity();
  bool ok = true;
  const Matrix& w = ds.distances.values();
  const auto fit = factorize(ds.distances, 4, cfg, [&](int, int, const Matrix& h, const Matrix& s) {
    const double cur = (w - h * s * h.transpose()).squaredNorm();
    if (cur > prev * (1 + 1e-8)) ok = false;
    prev = cur;
  });
  EXPECT_TRUE(ok);
  for (std::size_t i = 1; i < fit.trace.size(); ++i)
    EXPECT_LE(fit.trace[i], fit.trace[i - 1] * (1 + 1e-8) + 1e-12);
}

TEST(Factorize, NonnegativeAfterEveryIteration) {
  const Matrix w = ts::random_distance(30, 4);
  bool ok = true;
  factorize(w, 3, quick(1, 3), [&](int, int, const Matrix& h, const Matrix& s) {
    ok = ok && (h.array() >= 0).all() && (s.array() >= 0).all();
  });
  EXPECT_TRUE(ok);
}

TEST(Factorize, MonotoneOnRandomMatrices) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix w = ts::random_distance(40, seed);
    double prev = std::numeric_limits<double>::infinity();
    int last_restart = -1;
    bool ok = true;
    factorize(w, 3, quick(seed, 2), [&](int r, int, const Matrix& h, const Matrix& s) {
      if (r != last_restart) {
        prev = std::numeric_limits<double>::infinity();
        last_restart = r;
      }
      const double cur = ts::naive_objective(w, h, s);
      if (cur > prev * (1 + 1e-8)) ok = false;
      prev = cur;
    });
    EXPECT_TRUE(ok) << "seed " << seed;
  }
}

TEST(Factorize, UnguardedPublishedRuleCanIncreaseObjective) {
  // Documents why the guard exists: without it the classic H rule is not monotone.
  int increases = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix w = ts::random_distance(50, seed);
    FactorizeConfig cfg = quick(seed, 1);
    cfg.monotone_guard = false;
    const auto fit = factorize(w, 3, cfg);
    for (std::size_t i = 1; i < fit.trace.size(); ++i)
      if (fit.trace[i] > fit.trace[i - 1] * (1 + 1e-8)) {
        ++increases;
        break;
      }
  }
  EXPECT_GT(increases, 0);
}

TEST(Factorize, DeterministicGivenSeed) {
  const Matrix w = ts::random_distance(25, 9);
  const auto a = factorize(w, 3, quick(42));
  const auto b = factorize(w, 3, quick(42));
  EXPECT_EQ(a.factors.H, b.factors.H);
  EXPECT_EQ(a.factors.S, b.factors.S);
  EXPECT_EQ(a.trace, b.trace);
}

TEST(Factorize, BestRestartHasLowestObjective) {
  const Matrix w = ts::random_distance(25, 10);
  const auto fit = factorize(w, 3, quick(5, 6));
  ASSERT_EQ(fit.restart_objectives.size(), 6u);
  const double lowest = *std::min_element(fit.restart_objectives.begin(), fit.restart_objectives.end());
  EXPECT_EQ(fit.objective, lowest);
  EXPECT_EQ(fit.restart_objectives[fit.best_restart], lowest);
  EXPECT_NEAR(fit.objective, objective(w, fit.factors), 1e-9 * fit.objective);
}

TEST(Factorize, ScaleEquivariantWithScaledCore) {
  // cW started from (H0, c S0) follows the same H path with S scaled by c.
  const auto ds = planted_latency(3, {6, 6, 6}, {1, 2}, {10, 12}, 3);
  const Matrix& w = ds.distances.values();
  const auto init = initial_factors(w, 3, 7);
  const auto base = factorize_from(w, init, quick(7, 1));
  for (double c : {0.25, 3.0, 4.0}) {
    const auto scaled = factorize_from(Matrix(c * w), FactorPair{init.H, c * init.S}, quick(7, 1));
    EXPECT_EQ(assign_labels(scaled.factors.H).labels, assign_labels(base.factors.H).labels) << "c=" << c;
    EXPECT_LE((scaled.factors.H - base.factors.H).norm(), 1e-6 * base.factors.H.norm());
    EXPECT_LE((scaled.factors.S - c * base.factors.S).norm(), 1e-6 * c * base.factors.S.norm());
  }
}

TEST(Factorize, PermutationEquivariant) {
  const auto ds = planted_latency(3, {5, 5, 5}, {1, 2}, {10, 12}, 8);
  const Matrix& w = ds.distances.values();
  const auto perm = ts::random_permutation(w.rows(), 11);
  const Matrix wp = ds.distances.permuted(perm).values();
  FactorizeConfig cfg;
  for (int r = 0; r < 3; ++r) {
    const auto init = initial_factors(w, 3, 99, r);
    FactorPair init_p{Matrix(init.H.rows(), 3), init.S};
    for (Index i = 0; i < w.rows(); ++i) init_p.H.row(i) = init.H.row(perm[i]);
    const auto l = assign_labels(factorize_from(w, init, cfg).factors.H).labels;
    const auto lp = assign_labels(factorize_from(wp, init_p, cfg).factors.H).labels;
    for (Index i = 0; i < w.rows(); ++i) EXPECT_EQ(lp[i], l[perm[i]]);
  }
}

TEST(Factorize, InputErrors) {
  const Matrix w = ts::random_distance(5, 1);
  EXPECT_THROW(factorize(w, 1, quick()), ValueError);
  EXPECT_THROW(factorize(w, 6, quick()), ValueError);
  EXPECT_THROW(factorize(Matrix::Zero(5, 5), 2, quick()), DegenerateError);
  EXPECT_THROW(factorize(Matrix::Ones(2, 3), 2, quick()), FormatError);
  EXPECT_THROW(factorize_from(w, FactorPair{Matrix::Ones(4, 2), Matrix::Ones(2, 2)}, quick()), DimensionError);
  FactorizeConfig bad;
  bad.restarts = 0;
  EXPECT_THROW(factorize(w, 2, bad), ValueError);
  bad = FactorizeConfig{};
  bad.rel_tol = 0;
  EXPECT_THROW(bad.validate(), ValueError);
  bad = FactorizeConfig{};
  bad.epsilon_guard = 0;
  EXPECT_THROW(bad.validate(), ValueError);
}

TEST(Factorize, PlantedLatencyRecovered) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ds = planted_latency(3, {4, 4, 4}, {1, 2}, {10, 12}, seed);
    const auto fit = factorize(ds.distances, 3, quick(seed, 10));
    hits += same_partition(assign_labels(fit.factors.H).labels, ds.truth_labels);
  }
  EXPECT_GE(hits, 9);
}

TEST(Objective, ExactIsZero) {
  const Matrix h = ts::random_nonneg(5, 2, 1);
  const Matrix s = Matrix::Identity(2, 2);
  EXPECT_LE(objective(h * s * h.transpose(), FactorPair{h, s}), 1e-10);
}

TEST(Objective, ZeroHGivesSquaredNorm) {
  const Matrix w = ts::random_distance(5, 2);
  EXPECT_NEAR(objective(w, FactorPair{Matrix::Zero(5, 2), Matrix::Ones(2, 2)}), w.squaredNorm(), 1e-12);
}

TEST(Objective, OnesMinusIdentityByHand) {
  const Matrix w = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
  // W - ones(3,3) = -I, so the error is 3.
  EXPECT_NEAR(objective(w, FactorPair{Matrix::Ones(3, 1), Matrix::Ones(1, 1)}), 3.0, 1e-12);
}

TEST(Objective, MatchesEntrywiseOracleAndExpandedForm) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix w = ts::random_distance(9, seed);
    const Matrix h = ts::random_nonneg(9, 3, seed + 10);
    const Matrix s = ts::random_nonneg(3, 3, seed + 20);
    const double dense = objective(w, FactorPair{h, s});
    EXPECT_NEAR(dense, ts::naive_objective(w, h, s), 1e-10);
    const double expanded =
        detail::expanded_objective(w.squaredNorm(), h.transpose() * w * h, h.transpose() * h, s);
    EXPECT_NEAR(dense, expanded, 1e-9 * std::max(1.0, dense));
  }
}

TEST(Objective, ShapeMismatch) {
  EXPECT_THROW(objective(Matrix::Zero(3, 3), FactorPair{Matrix::Zero(2, 2), Matrix::Zero(2, 2)}),
               DimensionError);
}

TEST(AssignLabels, ArgmaxTiesAndZeroRows) {
  Matrix h(4, 2);
  h << 0.1, 0.9, 0.5, 0.5, 0, 0, 2, 1;
  const auto out = assign_labels(h);
  EXPECT_EQ(out.labels, (Labels{1, 0, 0, 0}));
  EXPECT_EQ(out.zero_rows, 1u);
}

TEST(AssignLabels, OneHotIdentity) {
  const Labels truth{2, 0, 1, 1, 2};
  Matrix h = Matrix::Zero(5, 3);
  for (int i = 0; i < 5; ++i) h(i, truth[i]) = 1;
  EXPECT_EQ(assign_labels(h).labels, truth);
}

TEST(ValidityGaps, DiagonalS) {
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = 3;
  s(1, 1) = 5;
  const auto v = validity_gaps(s);
  EXPECT_EQ(v.clusters[0].gap, 3);
  EXPECT_EQ(v.clusters[1].gap, 5);
  EXPECT_EQ(v.separated_count(), 2u);
}

TEST(ValidityGaps, ConstantSBoundary) {
  const auto v = validity_gaps(Matrix::Constant(2, 2, 2.0));
  EXPECT_EQ(v.clusters[0].gap, 0);
  EXPECT_EQ(v.clusters[1].gap, 0);
  EXPECT_EQ(v.separated_count(), 0u);
}

TEST(ValidityGaps, MixedByHand) {
  Matrix s(2, 2);
  s << 5, 1, 1, 0.5;
  const auto v = validity_gaps(s);
  EXPECT_EQ(v.clusters[0].gap, 4);
  EXPECT_EQ(v.clusters[1].gap, -0.5);
  EXPECT_TRUE(v.clusters[0].separated);
  EXPECT_FALSE(v.clusters[1].separated);
}

TEST(InitialFactors, NonnegativeAndScaled) {
  const Matrix w = ts::random_distance(20, 1, 0, 10);
  const auto fp = initial_factors(w, 3, 1, 0);
  EXPECT_TRUE((fp.H.array() > 0).all());
  EXPECT_TRUE((fp.S.array() > 0).all());
  EXPECT_EQ(fp.S, fp.S.transpose());
  EXPECT_LE(fp.H.maxCoeff(), std::sqrt(w.mean() / 3) + 1e-12);
  EXPECT_NE(initial_factors(w, 3, 1, 1).H, fp.H);
}
