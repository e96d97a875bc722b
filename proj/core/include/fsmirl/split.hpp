#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fsmirl/graph.hpp"
#include "fsmirl/types.hpp"

namespace fsmirl {

enum class Role : std::uint8_t { Train, Validation, Test, Unused };

const char* role_name(Role r);
std::optional<Role> role_from_name(const std::string& name);

// Per-node train/validation/test partition. Roles are disjoint by
// construction (one role per node).
class SplitAssignment {
public:
  SplitAssignment() = default;
  explicit SplitAssignment(std::size_t num_nodes, Role fill = Role::Unused)
      : roles_(num_nodes, fill) {}

  std::size_t size() const { return roles_.size(); }
  Role role(NodeId v) const { return roles_.at(static_cast<std::size_t>(v)); }
  void set_role(NodeId v, Role r) {
    roles_.at(static_cast<std::size_t>(v)) = r;
  }

  std::vector<NodeId> nodes_with(Role r) const;
  std::size_t count(Role r) const;

private:
  std::vector<Role> roles_;
};

// Partial label map: the labels visible to the sampler and the trainer.
// Only training-split labels are populated, so inference paths cannot read
// evaluation labels. Tests may install an audit hook that observes every
// lookup.
class KnownLabels {
public:
  explicit KnownLabels(std::size_t num_nodes)
      : labels_(num_nodes, kUnknown) {}

  static KnownLabels from_split(const Graph& g, const SplitAssignment& split,
                                Role visible = Role::Train);

  void set(NodeId v, std::int32_t label);

  std::optional<std::int32_t> label(NodeId v) const {
    if (audit_) audit_(v);
    const auto raw = labels_.at(static_cast<std::size_t>(v));
    if (raw == kUnknown) return std::nullopt;
    return raw;
  }

  bool known(NodeId v) const { return label(v).has_value(); }

  // Number of nodes with a known label.
  std::int64_t population() const { return population_; }
  std::size_t size() const { return labels_.size(); }

  void set_audit_hook(std::function<void(NodeId)> hook) {
    audit_ = std::move(hook);
  }

private:
  static constexpr std::int32_t kUnknown = -1;
  std::vector<std::int32_t> labels_;
  std::int64_t population_ = 0;
  std::function<void(NodeId)> audit_;
};

}  // namespace fsmirl
