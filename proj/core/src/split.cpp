#include "fsmirl/split.hpp"

namespace fsmirl {

const char* role_name(Role r) {
  switch (r) {
    case Role::Train:
      return "train";
    case Role::Validation:
      return "validation";
    case Role::Test:
      return "test";
    case Role::Unused:
      return "unused";
  }
  return "unused";
}

std::optional<Role> role_from_name(const std::string& name) {
  if (name == "train") return Role::Train;
  if (name == "validation" || name == "val") return Role::Validation;
  if (name == "test") return Role::Test;
  if (name == "unused") return Role::Unused;
  return std::nullopt;
}

std::vector<NodeId> SplitAssignment::nodes_with(Role r) const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < roles_.size(); ++v) {
    if (roles_[v] == r) out.push_back(static_cast<NodeId>(v));
  }
  return out;
}

std::size_t SplitAssignment::count(Role r) const {
  std::size_t c = 0;
  for (Role x : roles_) {
    if (x == r) ++c;
  }
  return c;
}

KnownLabels KnownLabels::from_split(const Graph& g,
                                    const SplitAssignment& split,
                                    Role visible) {
  if (split.size() != static_cast<std::size_t>(g.num_nodes())) {
    throw ShapeError("split size does not match graph node count");
  }
  KnownLabels known(split.size());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (split.role(v) == visible) known.set(v, g.label(v));
  }
  return known;
}

void KnownLabels::set(NodeId v, std::int32_t label) {
  if (label < 0) {
    throw ValidationError("known label must be nonnegative");
  }
  auto& slot = labels_.at(static_cast<std::size_t>(v));
  if (slot == kUnknown) ++population_;
  slot = label;
}

}  // namespace fsmirl
