#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fsmirl/types.hpp"

namespace fsmirl {

// Immutable node-attributed graph. Adjacency is symmetric CSR with neighbor
// lists sorted ascending; self-loops and duplicate edges are stripped at
// construction. Safe for concurrent reads.
class Graph {
public:
  // Builds a graph from an arbitrary edge list. Edges are symmetrized and
  // deduplicated; self-loops are dropped. Throws ValidationError on dangling
  // endpoints, labels outside [0, num_classes), or non-finite features.
  static Graph from_edges(Eigen::MatrixXd features,
                          std::vector<std::int32_t> labels,
                          std::int32_t num_classes,
                          std::span<const std::pair<NodeId, NodeId>> edges);

  NodeId num_nodes() const { return static_cast<NodeId>(labels_.size()); }
  std::int32_t num_classes() const { return num_classes_; }
  Eigen::Index feature_dim() const { return features_.cols(); }
  std::int64_t num_undirected_edges() const {
    return static_cast<std::int64_t>(targets_.size()) / 2;
  }

  // Neighbors of v in ascending id order.
  std::span<const NodeId> neighbors(NodeId v) const {
    check_node(v);
    return {targets_.data() + offsets_[v],
            static_cast<std::size_t>(offsets_[v + 1] - offsets_[v])};
  }

  std::int64_t degree(NodeId v) const {
    check_node(v);
    return offsets_[v + 1] - offsets_[v];
  }

  const Eigen::MatrixXd& features() const { return features_; }
  Eigen::VectorXd feature_row(NodeId v) const {
    check_node(v);
    return features_.row(v).transpose();
  }

  const std::vector<std::int32_t>& labels() const { return labels_; }
  std::int32_t label(NodeId v) const {
    check_node(v);
    return labels_[v];
  }

  // Distinct undirected edges as (u, v) with u < v, lexicographically sorted.
  std::vector<std::pair<NodeId, NodeId>> undirected_edges() const;

private:
  Graph() = default;
  void check_node(NodeId v) const {
    if (v < 0 || v >= num_nodes()) {
      throw std::out_of_range("node id " + std::to_string(v) +
                              " out of range [0, " +
                              std::to_string(num_nodes()) + ")");
    }
  }

  std::vector<std::int64_t> offsets_;
  std::vector<NodeId> targets_;
  Eigen::MatrixXd features_;
  std::vector<std::int32_t> labels_;
  std::int32_t num_classes_ = 0;
};

// Removes floor(fraction * |undirected edges|) undirected edges, chosen
// uniformly without replacement under the seed. Deletion takes the prefix of
// a single seeded permutation, so for a fixed seed the surviving edge set at
// a higher fraction is a subset of the one at a lower fraction.
Graph delete_edges(const Graph& g, double fraction, std::uint64_t seed);

// Fraction of v's neighbors sharing v's label. Requires deg(v) >= 1.
double label_homogeneity(const Graph& g, NodeId v);

}  // namespace fsmirl
