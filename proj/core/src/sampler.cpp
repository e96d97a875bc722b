#include "fsmirl/sampler.hpp"

#include <cmath>
#include <string>

#include "fsmirl/rng.hpp"
#include "fsmirl/types.hpp"

namespace fsmirl {

AttentionProjection AttentionProjection::init(Eigen::Index feature_dim,
                                              std::uint64_t run_seed) {
  if (feature_dim <= 0)
    throw ConfigError("AttentionProjection: feature_dim must be positive");
  rng::Engine eng(rng::derive(run_seed, rng::kProjection));
  const Eigen::Index n = 2 * feature_dim;
  const double bound = std::sqrt(6.0 / static_cast<double>(n));
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = eng.uniform(-bound, bound);
  return AttentionProjection(std::move(v));
}

std::vector<double> attention_weights(const AttentionProjection& proj,
                                      const Eigen::VectorXd& x_target,
                                      const Eigen::MatrixXd& x_neighbor_rows,
                                      std::span<const NodeId> ids) {
  const Eigen::Index d = proj.feature_dim();
  if (x_target.size() != d || x_neighbor_rows.cols() != d)
    throw ShapeError("attention_weights: feature dimension mismatch");
  const Eigen::Index m = x_neighbor_rows.rows();
  if (m < 1)
    throw ValidationError("attention_weights: needs at least one neighbor");

  const double target_part = proj.vec().head(d).dot(x_target);
  Eigen::VectorXd scores =
      (x_neighbor_rows * proj.vec().tail(d)).array() + target_part;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!std::isfinite(scores[i])) {
      const std::string who =
          i < static_cast<Eigen::Index>(ids.size())
              ? "node " + std::to_string(ids[static_cast<std::size_t>(i)])
              : "neighbor index " + std::to_string(i);
      throw NumericError("attention_weights: non-finite score at " + who);
    }
  }

  const double max_score = scores.maxCoeff();
  Eigen::VectorXd ex = (scores.array() - max_score).exp();
  const double total = ex.sum();
  std::vector<double> out(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i)
    out[static_cast<std::size_t>(i)] = ex[i] / total;
  return out;
}

SamplingProfile sampling_profile(const Graph& g, NodeId v,
                                 const KnownLabels& known,
                                 const SignatureTable& table,
                                 const AttentionProjection& proj) {
  SamplingProfile profile;
  profile.target = v;
  const auto nbrs = g.neighbors(v);
  if (nbrs.empty()) return profile;

  profile.neighbors.assign(nbrs.begin(), nbrs.end());
  profile.branches.resize(nbrs.size(), Branch::Attention);
  profile.weights.assign(nbrs.size(), 0.0);

  const auto target_label = known.label(v);
  std::vector<std::size_t> causal_idx;
  std::vector<std::size_t> attention_idx;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    const auto lbl = known.label(nbrs[i]);
    if (target_label && lbl && *lbl == *target_label) {
      profile.branches[i] = Branch::Causal;
      causal_idx.push_back(i);
    } else {
      attention_idx.push_back(i);
    }
  }

  const double deg = static_cast<double>(nbrs.size());
  if (!causal_idx.empty()) {
    // A same-known-label neighbor sees v (known label) in its own
    // neighborhood, so its signature is never empty here.
    double branch_sum = 0.0;
    std::vector<double> raw(causal_idx.size());
    for (std::size_t k = 0; k < causal_idx.size(); ++k) {
      raw[k] = causal_weight(table, known, nbrs[causal_idx[k]]);
      branch_sum += raw[k];
    }
    const double mass = static_cast<double>(causal_idx.size()) / deg;
    for (std::size_t k = 0; k < causal_idx.size(); ++k)
      profile.weights[causal_idx[k]] = mass * raw[k] / branch_sum;
  }
  if (!attention_idx.empty()) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(attention_idx.size()),
                         g.feature_dim());
    std::vector<NodeId> ids(attention_idx.size());
    for (std::size_t k = 0; k < attention_idx.size(); ++k) {
      rows.row(static_cast<Eigen::Index>(k)) =
          g.features().row(nbrs[attention_idx[k]]);
      ids[k] = nbrs[attention_idx[k]];
    }
    const auto att = attention_weights(proj, g.feature_row(v), rows, ids);
    const double mass = static_cast<double>(attention_idx.size()) / deg;
    for (std::size_t k = 0; k < attention_idx.size(); ++k)
      profile.weights[attention_idx[k]] = mass * att[k];
  }

  double total = 0.0;
  for (double w : profile.weights) total += w;
  for (double& w : profile.weights) w /= total;
  return profile;
}

std::vector<SamplingProfile> build_profiles(const Graph& g,
                                            const KnownLabels& known,
                                            const SignatureTable& table,
                                            const AttentionProjection& proj) {
  std::vector<SamplingProfile> profiles;
  profiles.reserve(static_cast<std::size_t>(g.num_nodes()));
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    profiles.push_back(sampling_profile(g, v, known, table, proj));
  return profiles;
}

NeighborDraw sample_neighbors(const SamplingProfile& profile, std::size_t s,
                              std::uint64_t seed) {
  if (profile.empty())
    throw ValidationError("sample_neighbors: empty profile for node " +
                          std::to_string(profile.target));
  NeighborDraw draw;
  if (s == 0) {
    draw.zero_sample_warning = true;
    return draw;
  }
  rng::Engine eng(seed);
  draw.nodes.reserve(s);
  if (profile.neighbors.size() < s) {
    for (std::size_t k = 0; k < s; ++k) {
      const std::size_t i = rng::weighted_index(eng, profile.weights, 1.0);
      draw.nodes.push_back(profile.neighbors[i]);
    }
  } else {
    std::vector<double> remaining(profile.weights.begin(),
                                  profile.weights.end());
    double total = 0.0;
    for (double w : remaining) total += w;
    for (std::size_t k = 0; k < s; ++k) {
      const std::size_t i = rng::weighted_index(eng, remaining, total);
      draw.nodes.push_back(profile.neighbors[i]);
      total -= remaining[i];
      remaining[i] = 0.0;
    }
  }
  return draw;
}

nlohmann::json profiles_to_json(std::span<const SamplingProfile> profiles) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& p : profiles) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < p.neighbors.size(); ++i) {
      entries.push_back(
          {{"neighbor", p.neighbors[i]},
           {"weight", p.weights[i]},
           {"branch",
            p.branches[i] == Branch::Causal ? "causal" : "attention"}});
    }
    out[std::to_string(p.target)] = std::move(entries);
  }
  return out;
}

}  // namespace fsmirl
