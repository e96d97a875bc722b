#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "fsmirl/types.hpp"

namespace fsmirl {

enum class KernelKind { Kronecker, Gaussian };

struct KernelSpec {
  KernelKind kind = KernelKind::Kronecker;
  // Gaussian only. kAuto asks the consumer to pick a bandwidth from the
  // data via the median heuristic; kernel_eval and gram require a fixed
  // positive value.
  double bandwidth = 0.0;

  static constexpr double kAuto = 0.0;

  static KernelSpec kronecker() { return {KernelKind::Kronecker, 0.0}; }
  static KernelSpec gaussian(double bw) {
    if (bw <= 0.0) throw ConfigError("gaussian bandwidth must be positive");
    return {KernelKind::Gaussian, bw};
  }
  static KernelSpec gaussian_auto() { return {KernelKind::Gaussian, kAuto}; }
};

// Samples are rows of an Eigen matrix throughout this module.
using GramMatrix = Eigen::MatrixXd;

// Kronecker: 1 iff a == b exactly. Gaussian: exp(-|a-b|^2 / (2 bw^2)).
double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b);

// Median of pairwise Euclidean distances over all distinct sample pairs.
// Exact for n <= 2000; larger inputs are reduced to a seeded uniform
// subsample of 2000 rows first. Throws DegenerateBandwidthError when every
// pairwise distance is zero.
double median_heuristic(const Eigen::MatrixXd& samples,
                        std::uint64_t seed = 0);

// entries(i, j) = kernel_eval(row i, row j); exactly symmetric because each
// off-diagonal pair is evaluated once and mirrored.
GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& samples);

// J K J with J = I - (1/n) 1 1^T.
GramMatrix center(const GramMatrix& k);

// Share of the population exactly equal to the query, i.e. the discrete
// kernel density estimate under the Kronecker kernel.
template <class T>
double discrete_kde(const T& query, std::span<const T> population) {
  if (population.empty()) {
    throw std::invalid_argument("discrete_kde: empty population");
  }
  std::int64_t matches = 0;
  for (const T& item : population) {
    if (item == query) ++matches;
  }
  return static_cast<double>(matches) /
         static_cast<double>(population.size());
}

}  // namespace fsmirl
