#include "fsmirl/signatures.hpp"

#include <cmath>

#include "fsmirl/types.hpp"

namespace fsmirl {

std::optional<NeighborhoodSignature> signature(const Graph& g, NodeId v,
                                               const KnownLabels& known) {
  const auto nbrs = g.neighbors(v);
  if (nbrs.empty())
    throw ValidationError("signature: node " + std::to_string(v) +
                          " is isolated");

  std::vector<std::int64_t> class_counts(
      static_cast<std::size_t>(g.num_classes()), 0);
  std::int64_t known_total = 0;
  for (NodeId n : nbrs) {
    if (auto lbl = known.label(n)) {
      ++class_counts[static_cast<std::size_t>(*lbl)];
      ++known_total;
    }
  }
  if (known_total == 0) return std::nullopt;

  NeighborhoodSignature sig;
  sig.histogram_quarters.resize(class_counts.size());
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    const double prop = static_cast<double>(class_counts[c]) /
                        static_cast<double>(known_total);
    // Round half up to the nearest quarter.
    sig.histogram_quarters[c] =
        static_cast<std::uint8_t>(std::floor(4.0 * prop + 0.5));
  }
  sig.degree_bucket = static_cast<std::int32_t>(
      std::floor(std::log2(static_cast<double>(nbrs.size()))));
  return sig;
}

SignatureTable SignatureTable::build(const Graph& g,
                                     const KnownLabels& known) {
  SignatureTable table;
  table.signatures_.resize(static_cast<std::size_t>(g.num_nodes()));
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (g.degree(v) == 0) continue;  // stays nullopt, never sampled from
    table.signatures_[static_cast<std::size_t>(v)] = signature(g, v, known);
  }
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const auto lbl = known.label(v);
    if (!lbl) continue;
    ++table.population_;
    const auto& sig = table.signatures_[static_cast<std::size_t>(v)];
    if (!sig) continue;
    ++table.signature_counts_[*sig];
    ++table.joint_counts_[JointKey{*sig, *lbl}];
  }
  return table;
}

std::int64_t SignatureTable::count_signature(
    const NeighborhoodSignature& s) const {
  const auto it = signature_counts_.find(s);
  return it == signature_counts_.end() ? 0 : it->second;
}

std::int64_t SignatureTable::count_joint(const NeighborhoodSignature& s,
                                         std::int32_t label) const {
  const auto it = joint_counts_.find(JointKey{s, label});
  return it == joint_counts_.end() ? 0 : it->second;
}

double causal_weight(const SignatureTable& table, const KnownLabels& known,
                     NodeId neighbor) {
  const auto lbl = known.label(neighbor);
  if (!lbl)
    throw ValidationError("causal_weight: neighbor " +
                          std::to_string(neighbor) + " has no known label");
  const auto& sig = table.of(neighbor);
  if (!sig)
    throw ValidationError("causal_weight: neighbor " +
                          std::to_string(neighbor) + " has empty signature");
  const std::int64_t joint = table.count_joint(*sig, *lbl);
  // The neighbor itself is in the population when its label is known, so
  // the joint count is at least 1 whenever this is called on such a node.
  if (joint <= 0 || table.population() <= 0)
    throw ValidationError("causal_weight: neighbor not in population");
  const std::int64_t marginal = table.count_signature(*sig);
  return static_cast<double>(marginal) /
         (static_cast<double>(table.population()) *
          static_cast<double>(joint));
}

}  // namespace fsmirl
