#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fsmirl/kernels.hpp"

namespace fsmirl {

// Per-sample loss weights on the scaled simplex {w >= 0, sum(w) = n}.
// The fixed sum keeps weighted losses on the unweighted scale and rules out
// the all-zero minimizer; it also caps every entry at n.
struct SampleWeights {
  Eigen::VectorXd w;

  static SampleWeights ones(Eigen::Index n);
};

// Clip negatives to zero, rescale to sum n. Idempotent on feasible input.
// Returns false when the clip removes all mass (caller decides recovery).
bool project_to_simplex(SampleWeights& sw);

// Tr(kx J ky J) / n^2 with J = I - (1/n) 1 1^T. Computed as the Frobenius
// product of the two centered Grams, which makes the argument swap exact.
double hsic_biased(const GramMatrix& kx, const GramMatrix& ky);

// Same trace with divisor (n-1)^2. The source formulation calls this the
// unbiased estimate; it is the biased one rescaled, hence the name.
double hsic_scaled(const GramMatrix& kx, const GramMatrix& ky);

// hsic_scaled of Grams built from the weighted samples (w_k x_k). A gaussian
// spec with bandwidth kAuto gets a per-column median-heuristic bandwidth
// recomputed from the weighted samples (fallback 1 when degenerate).
double weighted_hsic(const SampleWeights& w, const Eigen::VectorXd& xi,
                     const Eigen::VectorXd& xj, const KernelSpec& spec);

struct PairDependence {
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  double value = 0.0;
};

struct DependenceReport {
  std::vector<PairDependence> pairs;
  double total = 0.0;
  // Per-iteration totals when produced by optimize_weights, else empty.
  std::vector<double> trace;

  nlohmann::json to_json() const;
};

using DimPair = std::pair<Eigen::Index, Eigen::Index>;

// Sum of weighted_hsic over the listed column pairs (each must satisfy
// 0 <= i < j < cols). Empty pair list is an error: the objective would be
// undefined.
DependenceReport total_dependence(
    const SampleWeights& w, const Eigen::MatrixXd& X,
    std::span<const DimPair> pairs,
    const KernelSpec& spec = KernelSpec::gaussian_auto());

struct ReweightConfig {
  int steps = 20;
  double learning_rate = 2.0;
  // Column pairs sampled per step; an unbiased stochastic estimate of the
  // full pairwise sum, which grows quadratically in the embedding width.
  int pairs_per_step = 32;
  // Fixed pair sample used for progress tracking and the fallback choice.
  int holdout_pairs = 8;
  std::uint64_t seed = 0;
  // Reference gradient path: central differences with h = 1e-4 * sqrt(n)
  // on the same per-step objective the closed form differentiates.
  bool finite_differences = false;
};

struct ReweightResult {
  SampleWeights weights;
  // Evaluated at the returned weights on the held-out pairs; trace holds the
  // held-out totals per iteration, starting from the all-ones baseline.
  DependenceReport holdout;
  bool divergence = false;
  int resets = 0;
};

// Projected stochastic descent on summed pairwise dependence, starting from
// all-ones weights. Per step the sampled pairs' column bandwidths are frozen,
// so the closed-form gradient and the finite-difference path differentiate
// the same function. Returns the final iterate unless its held-out total
// exceeds the all-ones baseline, in which case the best held-out iterate is
// returned instead; the reported holdout never exceeds the baseline.
ReweightResult optimize_weights(const Eigen::MatrixXd& X,
                                const ReweightConfig& config);

// (1/n) * sum_k w_k loss_k.
double apply_weights(const SampleWeights& w,
                     const Eigen::VectorXd& per_sample_losses);

}  // namespace fsmirl
