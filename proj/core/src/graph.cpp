#include "fsmirl/graph.hpp"

#include <algorithm>
#include <cmath>

#include "fsmirl/rng.hpp"

namespace fsmirl {

Graph Graph::from_edges(Eigen::MatrixXd features,
                        std::vector<std::int32_t> labels,
                        std::int32_t num_classes,
                        std::span<const std::pair<NodeId, NodeId>> edges) {
  const auto n = static_cast<NodeId>(labels.size());
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ValidationError("feature row count " +
                          std::to_string(features.rows()) +
                          " does not match node count " + std::to_string(n));
  }
  if (num_classes <= 0) {
    throw ValidationError("num_classes must be positive");
  }
  for (NodeId v = 0; v < n; ++v) {
    if (labels[v] < 0 || labels[v] >= num_classes) {
      throw ValidationError("node " + std::to_string(v) + " has label " +
                            std::to_string(labels[v]) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
  }
  if (!features.allFinite()) {
    throw ValidationError("feature matrix contains non-finite entries");
  }

  std::vector<std::pair<NodeId, NodeId>> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw ValidationError("edge endpoint out of range: (" +
                            std::to_string(u) + ", " + std::to_string(v) +
                            ") with " + std::to_string(n) + " nodes");
    }
    if (u == v) continue;  // self-loops stripped
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()),
                 directed.end());

  Graph g;
  g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  g.targets_.reserve(directed.size());
  for (const auto& [u, v] : directed) {
    g.offsets_[static_cast<std::size_t>(u) + 1]++;
    g.targets_.push_back(v);
  }
  for (std::size_t i = 1; i < g.offsets_.size(); ++i) {
    g.offsets_[i] += g.offsets_[i - 1];
  }
  g.features_ = std::move(features);
  g.labels_ = std::move(labels);
  g.num_classes_ = num_classes;
  return g;
}

std::vector<std::pair<NodeId, NodeId>> Graph::undirected_edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(static_cast<std::size_t>(num_undirected_edges()));
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

Graph delete_edges(const Graph& g, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw std::invalid_argument("delete fraction must lie in [0, 1]");
  }
  auto edges = g.undirected_edges();
  const auto m = edges.size();
  const auto k = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(m)));

  rng::Engine eng(rng::derive(seed, rng::kEdgeDelete));
  eng.shuffle(edges);
  // Keep the suffix: the permutation prefix is the deletion order, so a
  // larger fraction deletes a superset of a smaller one.
  std::vector<std::pair<NodeId, NodeId>> kept(edges.begin() + k, edges.end());
  return Graph::from_edges(g.features(), g.labels(), g.num_classes(), kept);
}

double label_homogeneity(const Graph& g, NodeId v) {
  const auto nbrs = g.neighbors(v);
  if (nbrs.empty()) {
    throw ValidationError("label_homogeneity undefined for isolated node " +
                          std::to_string(v));
  }
  std::int64_t same = 0;
  for (NodeId u : nbrs) {
    if (g.label(u) == g.label(v)) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(nbrs.size());
}

}  // namespace fsmirl
