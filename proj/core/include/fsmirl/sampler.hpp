#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fsmirl/graph.hpp"
#include "fsmirl/signatures.hpp"
#include "fsmirl/split.hpp"

namespace fsmirl {

// Fixed random projection scoring (target, neighbor) feature pairs.
// Drawn once per run and never trained.
class AttentionProjection {
public:
  static AttentionProjection init(Eigen::Index feature_dim,
                                  std::uint64_t run_seed);

  const Eigen::VectorXd& vec() const { return v_; }
  Eigen::Index feature_dim() const { return v_.size() / 2; }

private:
  explicit AttentionProjection(Eigen::VectorXd v) : v_(std::move(v)) {}
  Eigen::VectorXd v_;
};

enum class Branch : std::uint8_t { Causal, Attention };

// Per-node neighbor sampling distribution. Weights align with neighbors
// and sum to 1 whenever the profile is non-empty.
struct SamplingProfile {
  NodeId target = 0;
  std::vector<NodeId> neighbors;
  std::vector<double> weights;
  std::vector<Branch> branches;

  bool empty() const { return neighbors.empty(); }
};

// Softmax over proj . concat(x_target, x_i) for each neighbor row, with the
// max subtracted before exponentiation. `ids` is only used in error text.
std::vector<double> attention_weights(const AttentionProjection& proj,
                                      const Eigen::VectorXd& x_target,
                                      const Eigen::MatrixXd& x_neighbor_rows,
                                      std::span<const NodeId> ids = {});

// Combined per-neighbor weights for v. Neighbors whose known label equals
// v's known label take the causal branch (inverse conditional density);
// everyone else shares one attention softmax. Branch masses are
// proportional to branch sizes. A target without a known label puts every
// neighbor on the attention branch, so the same profile set serves both
// training and inference without touching held-out labels.
SamplingProfile sampling_profile(const Graph& g, NodeId v,
                                 const KnownLabels& known,
                                 const SignatureTable& table,
                                 const AttentionProjection& proj);

std::vector<SamplingProfile> build_profiles(const Graph& g,
                                            const KnownLabels& known,
                                            const SignatureTable& table,
                                            const AttentionProjection& proj);

struct NeighborDraw {
  std::vector<NodeId> nodes;
  bool zero_sample_warning = false;
};

// Draws s neighbors under the profile weights: with replacement when the
// profile has fewer than s entries, otherwise without replacement via
// successive renormalized draws. Deterministic for a given seed.
NeighborDraw sample_neighbors(const SamplingProfile& profile, std::size_t s,
                              std::uint64_t seed);

// Diagnostic export: node id -> neighbor/weight/branch triples.
nlohmann::json profiles_to_json(std::span<const SamplingProfile> profiles);

}  // namespace fsmirl
