#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsmirl/graph.hpp"
#include "fsmirl/hsic.hpp"
#include "fsmirl/metrics.hpp"
#include "fsmirl/sampler.hpp"
#include "fsmirl/split.hpp"

namespace fsmirl {

// Two-layer sampled-neighborhood encoder with mean aggregation: each layer
// transforms concat(self, mean of s sampled neighbors) and applies relu;
// a linear classifier head sits on top.
struct EncoderParams {
  Eigen::MatrixXd w1;  // (2 d_in) x h
  Eigen::VectorXd b1;  // h
  Eigen::MatrixXd w2;  // (2 h) x h
  Eigen::VectorXd b2;  // h
  Eigen::MatrixXd wc;  // h x C
  Eigen::VectorXd bc;  // C

  Eigen::Index input_dim() const { return w1.rows() / 2; }
  Eigen::Index hidden_dim() const { return w1.cols(); }
  Eigen::Index num_classes() const { return wc.cols(); }

  template <class F>
  void visit(F&& f) {
    f(w1); f(b1); f(w2); f(b2); f(wc); f(bc);
  }
  template <class F>
  void visit(F&& f) const {
    f(w1); f(b1); f(w2); f(b2); f(wc); f(bc);
  }
};

// Kaiming-uniform weights (entries within +/- sqrt(6/fan_in)), zero biases.
// Deterministic fill order under the seed.
EncoderParams init_params(Eigen::Index d_in, Eigen::Index hidden,
                          Eigen::Index num_classes, std::uint64_t seed);

// Draws neighbor multisets for the encoder layers. Implementations return
// an empty draw for isolated nodes (the aggregator then uses a zero
// neighbor mean).
class NeighborSampler {
public:
  virtual ~NeighborSampler() = default;
  virtual std::vector<NodeId> draw(NodeId v, std::size_t s,
                                   std::uint64_t seed) const = 0;
};

// Equal-weight draws: with replacement when deg < s, without otherwise.
// The ablation baseline; mirrors the weighted sampler's replacement rule so
// the two differ only in the distribution.
class UniformSampler : public NeighborSampler {
public:
  explicit UniformSampler(const Graph& g) : g_(&g) {}
  std::vector<NodeId> draw(NodeId v, std::size_t s,
                           std::uint64_t seed) const override;

private:
  const Graph* g_;
};

// Draws from precomputed per-node sampling profiles.
class ProfileSampler : public NeighborSampler {
public:
  explicit ProfileSampler(std::vector<SamplingProfile> profiles)
      : profiles_(std::move(profiles)) {}
  std::vector<NodeId> draw(NodeId v, std::size_t s,
                           std::uint64_t seed) const override;
  const std::vector<SamplingProfile>& profiles() const { return profiles_; }

private:
  std::vector<SamplingProfile> profiles_;
};

struct ForwardResult {
  Eigen::MatrixXd logits;      // batch x C
  Eigen::MatrixXd embeddings;  // batch x h, post-relu layer-2 output
};

// Neighbor draws are seeded per (seed, layer, node id), so results do not
// depend on batch composition or order.
ForwardResult forward(const Graph& g, std::span<const NodeId> batch,
                      const EncoderParams& params,
                      const NeighborSampler& sampler, int s,
                      std::uint64_t seed);

struct LossGrads {
  double loss = 0.0;
  EncoderParams grads;
};

// Weighted softmax cross-entropy plus l2 * squared norm of all parameters:
// loss = (1/B) sum_k w2_k CE_k + l2 * ||params||^2. Gradients are analytic
// through the sampled computation graph; the draws made in the forward pass
// are the ones differentiated.
LossGrads loss_and_grads(const Graph& g, std::span<const NodeId> batch,
                         std::span<const std::int32_t> labels,
                         const EncoderParams& params,
                         const NeighborSampler& sampler,
                         std::span<const double> w2, double l2, int s,
                         std::uint64_t seed);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 20;
  double learning_rate = 0.01;
  double l2 = 1e-3;
  int sample_size = 10;  // s, per layer
  int hidden = 128;
  // W2 refresh period in epochs; weights are also computed at epoch 0.
  int weight_update_period = 100;
  std::uint64_t seed = 0;
  bool use_ca_sampling = true;
  bool use_hsic_weights = true;
  ReweightConfig reweight;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double val_macro_f1 = 0.0;
};

struct TrainResult {
  EncoderParams params;  // best by validation accuracy (final if no val set)
  std::vector<EpochRecord> history;
  bool aborted = false;
  std::string abort_reason;
};

TrainResult train(const Graph& g, const SplitAssignment& split,
                  const TrainConfig& config);

Metrics evaluate(const EncoderParams& params, const Graph& g,
                 std::span<const NodeId> nodes,
                 std::span<const std::int32_t> labels,
                 const NeighborSampler& sampler, int s, std::uint64_t seed);

struct Checkpoint {
  EncoderParams params;
  std::uint64_t seed = 0;
  std::string config_hash;
};

void save_checkpoint(const std::string& path, const EncoderParams& params,
                     std::uint64_t seed, const std::string& config_hash);
Checkpoint load_checkpoint(const std::string& path);

void write_history_csv(const std::string& path,
                       std::span<const EpochRecord> history);

}  // namespace fsmirl
