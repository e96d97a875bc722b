#include "fsmirl/hsic.hpp"

#include <cmath>
#include <cstring>
#include <vector>

#include <gtest/gtest.h>

#include "fsmirl/kernels.hpp"
#include "fsmirl/types.hpp"
#include "test_support.hpp"

using namespace fsmirl;

namespace {

Eigen::MatrixXd random_samples(int n, int d, std::uint64_t seed) {
  support::TestRng rng(seed);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
  return x;
}

Eigen::MatrixXd integer_samples(int n, int d, int levels,
                                std::uint64_t seed) {
  support::TestRng rng(seed);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      x(i, j) = static_cast<double>(
          rng.below(static_cast<std::uint64_t>(levels)));
  return x;
}

}  // namespace

TEST(Hsic, BiasedMatchesDoubleSumOracle) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int n = 3 + static_cast<int>(seed % 8);
    const auto x = random_samples(n, 2, seed);
    const auto y = random_samples(n, 2, seed + 100);
    const auto kx = gram(KernelSpec::gaussian(1.0), x);
    const auto ky = gram(KernelSpec::gaussian(0.7), y);
    EXPECT_NEAR(hsic_biased(kx, ky), support::hsic_biased_oracle(kx, ky),
                1e-12);

    const auto xi = integer_samples(n, 2, 3, seed + 200);
    const auto yi = integer_samples(n, 2, 2, seed + 300);
    const auto kxi = gram(KernelSpec::kronecker(), xi);
    const auto kyi = gram(KernelSpec::kronecker(), yi);
    EXPECT_NEAR(hsic_biased(kxi, kyi), support::hsic_biased_oracle(kxi, kyi),
                1e-12);
  }
}

TEST(Hsic, ArgumentSymmetryIsBitwise) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int n = 4 + static_cast<int>(seed);
    const auto kx =
        gram(KernelSpec::gaussian(1.2), random_samples(n, 3, seed));
    const auto ky =
        gram(KernelSpec::gaussian(0.8), random_samples(n, 3, seed + 40));
    const double ab = hsic_biased(kx, ky);
    const double ba = hsic_biased(ky, kx);
    EXPECT_EQ(std::memcmp(&ab, &ba, sizeof(double)), 0);
  }
}

TEST(Hsic, ScaledIsBiasedTimesSquareRatio) {
  const int n = 9;
  const auto kx = gram(KernelSpec::gaussian(1.0), random_samples(n, 2, 3));
  const auto ky = gram(KernelSpec::gaussian(1.0), random_samples(n, 2, 4));
  const double ratio = (static_cast<double>(n) * n) /
                       (static_cast<double>(n - 1) * (n - 1));
  EXPECT_NEAR(hsic_scaled(kx, ky), hsic_biased(kx, ky) * ratio, 1e-14);
}

TEST(Hsic, InvariantUnderJointRelabeling) {
  const int n = 10;
  const auto x = random_samples(n, 2, 5);
  const auto y = random_samples(n, 2, 6);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = (i * 7 + 3) % n;  // n coprime to 7
  Eigen::MatrixXd xp(n, 2), yp(n, 2);
  for (int i = 0; i < n; ++i) {
    xp.row(i) = x.row(perm[i]);
    yp.row(i) = y.row(perm[i]);
  }
  const auto spec = KernelSpec::gaussian(1.0);
  EXPECT_NEAR(hsic_biased(gram(spec, x), gram(spec, y)),
              hsic_biased(gram(spec, xp), gram(spec, yp)), 1e-12);
}

TEST(Hsic, NonnegativeAndLargeForDuplicates) {
  const int n = 40;
  const auto x = random_samples(n, 1, 8);
  const auto y = random_samples(n, 1, 9);
  const auto spec = KernelSpec::gaussian(1.0);
  const double indep = hsic_scaled(gram(spec, x), gram(spec, y));
  const double dup = hsic_scaled(gram(spec, x), gram(spec, x));
  EXPECT_GE(indep, -1e-12);
  EXPECT_GT(dup, indep * 5.0);
}

TEST(Hsic, RejectsMismatchedAndDegenerateShapes) {
  const auto k5 = gram(KernelSpec::gaussian(1.0), random_samples(5, 2, 10));
  const auto k6 = gram(KernelSpec::gaussian(1.0), random_samples(6, 2, 11));
  EXPECT_THROW(hsic_biased(k5, k6), ShapeError);
  const auto k1 = gram(KernelSpec::gaussian(1.0), random_samples(1, 2, 12));
  EXPECT_THROW(hsic_scaled(k1, k1), ValidationError);
}

TEST(SampleWeights, SimplexProjectionClipsAndRescales) {
  SampleWeights w = SampleWeights::ones(4);
  w.w << 2.0, -1.0, 3.0, 0.0;
  ASSERT_TRUE(project_to_simplex(w));
  EXPECT_GE(w.w.minCoeff(), 0.0);
  EXPECT_NEAR(w.w.sum(), 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(w.w(1), 0.0);

  SampleWeights all_clipped = SampleWeights::ones(3);
  all_clipped.w << -1.0, -2.0, 0.0;
  EXPECT_FALSE(project_to_simplex(all_clipped));
}

TEST(SampleWeights, ProjectionIdempotent) {
  SampleWeights w = SampleWeights::ones(5);
  w.w << 0.4, 1.8, -0.2, 2.0, 1.0;
  ASSERT_TRUE(project_to_simplex(w));
  const Eigen::VectorXd once = w.w;
  ASSERT_TRUE(project_to_simplex(w));
  EXPECT_LT((w.w - once).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(WeightedHsic, OnesWeightsReduceToPlainEstimator) {
  const int n = 16;
  const auto x = random_samples(n, 4, 13);
  const auto w = SampleWeights::ones(n);
  const auto spec = KernelSpec::gaussian(1.1);
  const double weighted = weighted_hsic(w, x.col(0), x.col(2), spec);
  const Eigen::MatrixXd c0 = x.col(0);
  const Eigen::MatrixXd c2 = x.col(2);
  const double plain = hsic_scaled(gram(spec, c0), gram(spec, c2));
  EXPECT_NEAR(weighted, plain, 1e-12);
}

TEST(WeightedHsic, KeepsSeparatingDependenceUnderNonuniformWeights) {
  // weighting must not destroy the estimator's ordering: a duplicated pair
  // dominates an independent pair under the same non-uniform weights
  const int n = 32;
  support::TestRng rng(14);
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x(i) = rng.normal();
    y(i) = rng.normal();
  }
  SampleWeights tilted = SampleWeights::ones(n);
  for (int i = 0; i < n; ++i) tilted.w(i) = 0.25 + 1.5 * rng.unit();
  project_to_simplex(tilted);
  const auto spec = KernelSpec::gaussian(1.0);
  const double dependent = weighted_hsic(tilted, x, x, spec);
  const double independent = weighted_hsic(tilted, x, y, spec);
  EXPECT_GT(dependent, 5.0 * independent);
  EXPECT_GE(dependent, 0.0);
}

TEST(TotalDependence, SumsPairTermsAndReportsThem) {
  const int n = 20;
  const auto x = random_samples(n, 4, 15);
  const auto w = SampleWeights::ones(n);
  const std::vector<DimPair> pairs = {{0, 1}, {1, 3}, {0, 2}};
  const auto report = total_dependence(w, x, pairs);
  ASSERT_EQ(report.pairs.size(), 3u);
  double sum = 0.0;
  for (const auto& p : report.pairs) {
    const double direct =
        weighted_hsic(w, x.col(p.i), x.col(p.j), KernelSpec::gaussian_auto());
    EXPECT_NEAR(p.value, direct, 1e-12);
    sum += p.value;
  }
  EXPECT_NEAR(report.total, sum, 1e-12);
}

TEST(TotalDependence, ValidatesPairIndices) {
  const auto x = random_samples(8, 3, 16);
  const auto w = SampleWeights::ones(8);
  EXPECT_THROW(total_dependence(w, x, std::vector<DimPair>{}),
               ValidationError);
  EXPECT_THROW(total_dependence(w, x, std::vector<DimPair>{{1, 1}}),
               ValidationError);
  EXPECT_THROW(total_dependence(w, x, std::vector<DimPair>{{0, 3}}),
               ValidationError);
}

TEST(OptimizeWeights, ReducesDependenceOnHalfDuplicatedColumn) {
  // Column 1 copies column 0 on the first half of the samples and is
  // independent on the rest; downweighting the copied half removes most of
  // the (0,1) dependence while the independent half keeps the columns alive.
  const int n = 64;
  support::TestRng rng(17);
  Eigen::MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = (i < n / 2) ? x(i, 0) : rng.normal();
  }
  ReweightConfig cfg;
  cfg.steps = 60;
  cfg.learning_rate = 8.0;
  cfg.pairs_per_step = 4;
  cfg.holdout_pairs = 1;
  cfg.seed = 5;
  const auto result = optimize_weights(x, cfg);
  EXPECT_FALSE(result.divergence);
  ASSERT_GE(result.holdout.trace.size(), 2u);
  // returned iterate never loses to the all-ones baseline on the holdout
  EXPECT_LE(result.holdout.total, result.holdout.trace.front());
  const std::vector<DimPair> target = {{0, 1}};
  const double before =
      total_dependence(SampleWeights::ones(n), x, target).total;
  const double after = total_dependence(result.weights, x, target).total;
  EXPECT_LE(after, 0.7 * before);
  EXPECT_GE(result.weights.w.minCoeff(), 0.0);
  EXPECT_NEAR(result.weights.w.sum(), static_cast<double>(n), 1e-9);
}

TEST(OptimizeWeights, DeterministicPerSeed) {
  const auto x = random_samples(24, 4, 18);
  ReweightConfig cfg;
  cfg.steps = 6;
  cfg.seed = 9;
  const auto a = optimize_weights(x, cfg);
  const auto b = optimize_weights(x, cfg);
  EXPECT_EQ((a.weights.w - b.weights.w).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.holdout.total, b.holdout.total);
}

TEST(OptimizeWeights, FiniteDifferencePathAgreesWithAnalytic) {
  const auto x = random_samples(20, 4, 19);
  ReweightConfig analytic;
  analytic.steps = 4;
  analytic.seed = 3;
  ReweightConfig fd = analytic;
  fd.finite_differences = true;
  const auto ra = optimize_weights(x, analytic);
  const auto rf = optimize_weights(x, fd);
  // identical pair draws, near-identical gradients: trajectories stay close
  EXPECT_LT((ra.weights.w - rf.weights.w).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(OptimizeWeights, RejectsDegenerateInputs) {
  ReweightConfig cfg;
  EXPECT_THROW(optimize_weights(random_samples(3, 4, 20), cfg),
               ValidationError);
  EXPECT_THROW(optimize_weights(random_samples(8, 1, 21), cfg),
               ValidationError);
}

TEST(ApplyWeights, WeightedMeanOfLosses) {
  SampleWeights w = SampleWeights::ones(4);
  w.w << 2.0, 0.0, 1.0, 1.0;
  Eigen::VectorXd losses(4);
  losses << 1.0, 10.0, 2.0, 4.0;
  EXPECT_DOUBLE_EQ(apply_weights(w, losses), (2.0 + 0.0 + 2.0 + 4.0) / 4.0);
}
