#include "fsmirl/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "fsmirl/rng.hpp"

namespace fsmirl {

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw ShapeError("kernel_eval: dimension mismatch (" +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  switch (spec.kind) {
    case KernelKind::Kronecker:
      return (a.array() == b.array()).all() ? 1.0 : 0.0;
    case KernelKind::Gaussian: {
      if (spec.bandwidth <= 0.0) {
        throw ConfigError("kernel_eval: gaussian kernel needs a bandwidth");
      }
      const double d2 = (a - b).squaredNorm();
      return std::exp(-d2 / (2.0 * spec.bandwidth * spec.bandwidth));
    }
  }
  throw ConfigError("kernel_eval: unknown kernel kind");
}

double median_heuristic(const Eigen::MatrixXd& samples, std::uint64_t seed) {
  Eigen::Index n = samples.rows();
  if (n < 2) {
    throw std::invalid_argument("median_heuristic needs at least 2 samples");
  }

  Eigen::MatrixXd subset;
  const Eigen::MatrixXd* rows = &samples;
  constexpr Eigen::Index kExactLimit = 2000;
  if (n > kExactLimit) {
    rng::Engine eng(rng::derive(seed, rng::kMedianSubsample));
    const auto picks = eng.sample_indices(static_cast<std::size_t>(n),
                                          static_cast<std::size_t>(kExactLimit));
    subset.resize(kExactLimit, samples.cols());
    for (Eigen::Index i = 0; i < kExactLimit; ++i) {
      subset.row(i) = samples.row(static_cast<Eigen::Index>(picks[i]));
    }
    rows = &subset;
    n = kExactLimit;
  }

  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dists.push_back((rows->row(i) - rows->row(j)).norm());
    }
  }
  std::sort(dists.begin(), dists.end());
  const std::size_t m = dists.size();
  const double median = (m % 2 == 1)
                            ? dists[m / 2]
                            : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
  if (median <= 0.0) {
    throw DegenerateBandwidthError(
        "median pairwise distance is zero (identical samples)");
  }
  return median;
}

GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& samples) {
  const Eigen::Index n = samples.rows();
  if (n < 1) {
    throw std::invalid_argument("gram needs at least 1 sample");
  }
  GramMatrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;  // both kernels evaluate to 1 at zero distance
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = kernel_eval(spec, samples.row(i).transpose(),
                                   samples.row(j).transpose());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

GramMatrix center(const GramMatrix& k) {
  const Eigen::Index n = k.rows();
  if (n == 0) return k;
  // J K J expands to K - rowmean - colmean + totalmean.
  const Eigen::VectorXd row_mean = k.rowwise().mean();
  const Eigen::VectorXd col_mean = k.colwise().mean().transpose();
  const double total_mean = k.mean();
  GramMatrix out = k;
  out.colwise() -= row_mean;
  out.rowwise() -= col_mean.transpose();
  out.array() += total_mean;
  return out;
}

}  // namespace fsmirl
