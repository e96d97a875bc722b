#include "fsmirl/shift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "fsmirl/rng.hpp"
#include "fsmirl/types.hpp"

namespace fsmirl {

const char* bias_level_name(BiasLevel level) {
  switch (level) {
    case BiasLevel::None: return "none";
    case BiasLevel::Small: return "small";
    case BiasLevel::Medium: return "medium";
    case BiasLevel::Big: return "big";
  }
  throw ConfigError("bias_level_name: unknown level");
}

BiasLevel bias_level_from_name(const std::string& name) {
  if (name == "none") return BiasLevel::None;
  if (name == "small") return BiasLevel::Small;
  if (name == "medium") return BiasLevel::Medium;
  if (name == "big") return BiasLevel::Big;
  throw ConfigError("unknown bias level: " + name);
}

double bias_tau(BiasLevel level) {
  switch (level) {
    case BiasLevel::None: return std::numeric_limits<double>::infinity();
    case BiasLevel::Small: return 0.5;
    case BiasLevel::Medium: return 0.2;
    case BiasLevel::Big: return 0.05;
  }
  throw ConfigError("bias_tau: unknown level");
}

namespace {

// Draw `count` distinct indices from `pool` with probability proportional
// to softmax(sign * homogeneity / tau), removing each pick from the pool.
std::vector<NodeId> tail_draw(rng::Engine& eng, std::vector<NodeId>& pool,
                              const std::vector<double>& homogeneity,
                              double tau, double sign, std::size_t count) {
  std::vector<NodeId> picked;
  if (count == 0) return picked;
  std::vector<double> weights(pool.size());
  if (std::isinf(tau)) {
    std::fill(weights.begin(), weights.end(), 1.0);
  } else {
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i)
      max_score = std::max(
          max_score,
          sign * homogeneity[static_cast<std::size_t>(pool[i])] / tau);
    for (std::size_t i = 0; i < pool.size(); ++i)
      weights[i] = std::exp(
          sign * homogeneity[static_cast<std::size_t>(pool[i])] / tau -
          max_score);
  }
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<bool> taken(pool.size(), false);
  picked.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = rng::weighted_index(eng, weights, total);
    picked.push_back(pool[i]);
    taken[i] = true;
    total -= weights[i];
    weights[i] = 0.0;
  }
  // Compact the pool, preserving order, so later draws exclude the picks.
  std::vector<NodeId> rest;
  rest.reserve(pool.size() - count);
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (!taken[i]) rest.push_back(pool[i]);
  pool = std::move(rest);
  return picked;
}

}  // namespace

SplitAssignment biased_split(const Graph& g, BiasLevel level,
                             int per_class_train, std::uint64_t seed,
                             int test_count, int val_count) {
  if (per_class_train < 1)
    throw ConfigError("biased_split: per_class_train must be >= 1");
  if (test_count < 0 || val_count < 0)
    throw ConfigError("biased_split: negative split count");

  const double tau = bias_tau(level);
  std::vector<double> homogeneity(static_cast<std::size_t>(g.num_nodes()),
                                  0.0);
  std::vector<std::vector<NodeId>> by_class(
      static_cast<std::size_t>(g.num_classes()));
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (g.degree(v) == 0) continue;
    homogeneity[static_cast<std::size_t>(v)] = label_homogeneity(g, v);
    by_class[static_cast<std::size_t>(g.label(v))].push_back(v);
  }
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].size() < static_cast<std::size_t>(per_class_train))
      throw ValidationError(
          "biased_split: class " + std::to_string(c) + " has only " +
          std::to_string(by_class[c].size()) + " candidates, needs " +
          std::to_string(per_class_train));
  }

  rng::Engine eng(rng::derive(seed, rng::kSplit));
  SplitAssignment split(static_cast<std::size_t>(g.num_nodes()));
  std::vector<NodeId> remaining;
  for (auto& pool : by_class) {
    // Train from the low-homogeneity tail of each class.
    for (NodeId v : tail_draw(eng, pool, homogeneity, tau, -1.0,
                              static_cast<std::size_t>(per_class_train)))
      split.set_role(v, Role::Train);
    remaining.insert(remaining.end(), pool.begin(), pool.end());
  }
  std::sort(remaining.begin(), remaining.end());

  const auto want_test = static_cast<std::size_t>(test_count);
  const auto want_val = static_cast<std::size_t>(val_count);
  if (remaining.size() < want_test + want_val)
    throw ValidationError(
        "biased_split: only " + std::to_string(remaining.size()) +
        " candidates left for " + std::to_string(want_test + want_val) +
        " test+validation nodes");
  // Test and validation from the high-homogeneity region.
  for (NodeId v : tail_draw(eng, remaining, homogeneity, tau, 1.0, want_test))
    split.set_role(v, Role::Test);
  for (NodeId v : tail_draw(eng, remaining, homogeneity, tau, 1.0, want_val))
    split.set_role(v, Role::Validation);
  return split;
}

namespace {

void check_synthetic_config(const SyntheticGeoConfig& c) {
  const bool probs_ok = c.p_in >= 0.0 && c.p_in <= 1.0 && c.p_out >= 0.0 &&
                        c.p_out <= 1.0 && c.p_in >= c.p_out;
  const bool rho_ok = std::abs(c.rho_train) <= 1.0 &&
                      std::abs(c.rho_test) <= 1.0;
  const bool frac_ok = c.train_fraction > 0.0 && c.val_fraction >= 0.0 &&
                       c.train_fraction + c.val_fraction < 1.0;
  if (c.blocks < 2 || c.nodes_per_block < 5 || c.feature_dim < 1 ||
      !probs_ok || !rho_ok || !frac_ok || c.class_separation < 0.0 ||
      c.structural_mix < 0.0 || c.structural_mix > 1.0)
    throw ConfigError("generate_synthetic_geo: invalid config");
}

std::vector<std::pair<NodeId, NodeId>> sample_block_edges(
    rng::Engine& eng, NodeId n, NodeId nodes_per_block, double p_same,
    double p_cross) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const bool same = u / nodes_per_block == v / nodes_per_block;
      if (eng.uniform() < (same ? p_same : p_cross)) edges.emplace_back(u, v);
    }
  }
  return edges;
}

}  // namespace

SyntheticGeo generate_synthetic_geo(const SyntheticGeoConfig& config,
                                    std::uint64_t seed) {
  check_synthetic_config(config);
  const NodeId npb = config.nodes_per_block;
  const NodeId n = config.blocks * npb;
  const Eigen::Index d = config.feature_dim;

  std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v)
    labels[static_cast<std::size_t>(v)] = v / npb;

  rng::Engine edge_eng(rng::derive(seed, rng::kGenerator, 1));
  auto edges =
      sample_block_edges(edge_eng, n, npb, config.p_in, config.p_out);

  // Class means: separation-scaled random unit directions.
  rng::Engine mean_eng(rng::derive(seed, rng::kGenerator, 2));
  Eigen::MatrixXd means(config.blocks, d);
  for (int c = 0; c < config.blocks; ++c) {
    Eigen::RowVectorXd dir(d);
    for (Eigen::Index j = 0; j < d; ++j) dir[j] = mean_eng.normal();
    const double norm = dir.norm();
    means.row(c) = config.class_separation *
                   (norm > 0.0 ? (dir / norm).eval() : dir);
  }

  rng::Engine feat_eng(rng::derive(seed, rng::kGenerator, 3));
  Eigen::MatrixXd features(n, d + 1);
  for (NodeId v = 0; v < n; ++v)
    for (Eigen::Index j = 0; j < d; ++j)
      features(v, j) =
          means(labels[static_cast<std::size_t>(v)], j) + feat_eng.normal();

  // Split before the confounder: its mixing coefficient depends on role.
  rng::Engine split_eng(rng::derive(seed, rng::kGenerator, 4));
  SplitAssignment split(static_cast<std::size_t>(n));
  const auto train_n = static_cast<std::size_t>(
      std::floor(config.train_fraction * static_cast<double>(npb)));
  const auto val_n = static_cast<std::size_t>(
      std::floor(config.val_fraction * static_cast<double>(npb)));
  for (int b = 0; b < config.blocks; ++b) {
    std::vector<NodeId> block(static_cast<std::size_t>(npb));
    for (NodeId i = 0; i < npb; ++i) block[static_cast<std::size_t>(i)] =
        b * npb + i;
    split_eng.shuffle(block);
    for (std::size_t i = 0; i < block.size(); ++i) {
      const Role r = i < train_n               ? Role::Train
                     : i < train_n + val_n     ? Role::Validation
                                               : Role::Test;
      split.set_role(block[i], r);
    }
  }

  // Confounder: rho * standardized label + sqrt(1 - rho^2) * noise, with
  // rho chosen by role. Validation follows the test distribution; the
  // harness treats validation as shifted alongside test.
  const double label_mean = static_cast<double>(config.blocks - 1) / 2.0;
  const double label_std = std::sqrt(
      (static_cast<double>(config.blocks) * config.blocks - 1.0) / 12.0);
  rng::Engine conf_eng(rng::derive(seed, rng::kGenerator, 5));
  for (NodeId v = 0; v < n; ++v) {
    const double rho =
        split.role(v) == Role::Train ? config.rho_train : config.rho_test;
    const double s =
        (static_cast<double>(labels[static_cast<std::size_t>(v)]) -
         label_mean) /
        label_std;
    features(v, d) =
        rho * s + std::sqrt(1.0 - rho * rho) * conf_eng.normal();
  }

  rng::Engine variant_eng(rng::derive(seed, rng::kGenerator, 6));
  const double mix = config.structural_mix;
  const double p_same = (1.0 - mix) * config.p_in + mix * config.p_out;
  const double p_cross = (1.0 - mix) * config.p_out + mix * config.p_in;
  auto variant_edges =
      sample_block_edges(variant_eng, n, npb, p_same, p_cross);

  Graph g = Graph::from_edges(features, labels, config.blocks, edges);
  Graph variant =
      Graph::from_edges(features, labels, config.blocks, variant_edges);
  return SyntheticGeo{std::move(g), std::move(split), std::move(variant)};
}

}  // namespace fsmirl
