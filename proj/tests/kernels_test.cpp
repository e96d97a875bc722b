#include "fsmirl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

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

}  // namespace

TEST(Kernels, KroneckerIsExactIndicator) {
  const auto spec = KernelSpec::kronecker();
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 2.0;
  b << 1.0, 2.0;
  EXPECT_EQ(kernel_eval(spec, a, b), 1.0);
  b(1) = 2.0 + 1e-15;
  EXPECT_EQ(kernel_eval(spec, a, b), 0.0);
}

TEST(Kernels, GaussianMatchesClosedForm) {
  const auto spec = KernelSpec::gaussian(2.0);
  Eigen::VectorXd a(2), b(2);
  a << 0.0, 0.0;
  b << 3.0, 4.0;  // squared distance 25
  EXPECT_NEAR(kernel_eval(spec, a, b), std::exp(-25.0 / 8.0), 1e-15);
  EXPECT_EQ(kernel_eval(spec, a, a), 1.0);
}

TEST(Kernels, GaussianRejectsNonPositiveBandwidth) {
  EXPECT_THROW(KernelSpec::gaussian(0.0), ConfigError);
  EXPECT_THROW(KernelSpec::gaussian(-1.0), ConfigError);
}

TEST(Kernels, GramSymmetricWithUnitDiagonal) {
  const auto x = random_samples(9, 3, 21);
  const auto k = gram(KernelSpec::gaussian(1.3), x);
  const Eigen::MatrixXd kt = k.transpose();
  EXPECT_EQ((k - kt).cwiseAbs().maxCoeff(), 0.0);  // mirrored, not recomputed
  for (int i = 0; i < k.rows(); ++i) EXPECT_EQ(k(i, i), 1.0);
}

TEST(Kernels, GramEntriesMatchKernelEval) {
  const auto x = random_samples(6, 2, 22);
  const auto spec = KernelSpec::gaussian(0.9);
  const auto k = gram(spec, x);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      EXPECT_NEAR(k(i, j),
                  kernel_eval(spec, x.row(i).transpose(),
                              x.row(j).transpose()),
                  1e-15);
}

TEST(Kernels, CenteringZeroesRowAndColumnSums) {
  const auto x = random_samples(8, 2, 23);
  const auto k = center(gram(KernelSpec::gaussian(1.0), x));
  EXPECT_LT(k.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(k.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kernels, CenteringIsIdempotent) {
  const auto x = random_samples(7, 3, 24);
  const auto k = gram(KernelSpec::gaussian(1.0), x);
  const auto once = center(k);
  const auto twice = center(once);
  EXPECT_LT((twice - once).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kernels, MedianHeuristicMatchesBruteForce) {
  const auto x = random_samples(15, 3, 25);
  std::vector<double> dists;
  for (int i = 0; i < 15; ++i)
    for (int j = i + 1; j < 15; ++j)
      dists.push_back((x.row(i) - x.row(j)).norm());
  std::sort(dists.begin(), dists.end());
  // median convention: midpoint average for an even count
  const std::size_t m = dists.size();
  const double expected = (m % 2 == 1)
                              ? dists[m / 2]
                              : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
  EXPECT_NEAR(median_heuristic(x), expected, 1e-12);
}

TEST(Kernels, MedianHeuristicThrowsOnDegenerateCloud) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 2);
  EXPECT_THROW(median_heuristic(x), DegenerateBandwidthError);
}

TEST(Kernels, DiscreteKdeCountsExactMatches) {
  const std::vector<int> population = {1, 2, 2, 3, 2};
  EXPECT_DOUBLE_EQ(
      discrete_kde(2, std::span<const int>(population)), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(
      discrete_kde(7, std::span<const int>(population)), 0.0);
  const std::vector<int> empty;
  EXPECT_THROW(discrete_kde(1, std::span<const int>(empty)),
               std::invalid_argument);
}
