#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fsmirl/graph.hpp"
#include "fsmirl/split.hpp"

namespace fsmirl {

// Discrete summary of a node's first-order neighborhood: the per-class
// proportion of known-label neighbors quantized to quarters, plus a
// log2 degree bucket. Two nodes compare equal iff both parts match, which
// makes Kronecker-delta density estimation over neighborhoods computable.
struct NeighborhoodSignature {
  // Per-class proportion in quarter units (0..4), rounded half up.
  std::vector<std::uint8_t> histogram_quarters;
  std::int32_t degree_bucket = 0;

  bool operator==(const NeighborhoodSignature&) const = default;
};

struct SignatureHash {
  std::size_t operator()(const NeighborhoodSignature& s) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint64_t byte) {
      h ^= byte;
      h *= 0x100000001b3ULL;
    };
    for (std::uint8_t q : s.histogram_quarters) feed(q);
    feed(static_cast<std::uint64_t>(s.degree_bucket) & 0xff);
    feed(static_cast<std::uint64_t>(s.degree_bucket) >> 8 & 0xff);
    return static_cast<std::size_t>(h);
  }
};

// Signature of v's neighborhood, or nullopt when v has no known-label
// neighbor (callers route such nodes to the attention branch). The degree
// bucket always reflects the full degree; requires deg(v) >= 1.
std::optional<NeighborhoodSignature> signature(const Graph& g, NodeId v,
                                               const KnownLabels& known);

// Signatures for every node plus occurrence counts over the known-label
// population, which back the discrete density estimates of the causal
// weights.
class SignatureTable {
public:
  static SignatureTable build(const Graph& g, const KnownLabels& known);

  const std::optional<NeighborhoodSignature>& of(NodeId v) const {
    return signatures_.at(static_cast<std::size_t>(v));
  }

  // Known-label node count (the KDE population size).
  std::int64_t population() const { return population_; }

  // |{known-label n : sig(n) = s}|
  std::int64_t count_signature(const NeighborhoodSignature& s) const;
  // |{known-label n : sig(n) = s and label(n) = label}|
  std::int64_t count_joint(const NeighborhoodSignature& s,
                           std::int32_t label) const;

private:
  struct JointKey {
    NeighborhoodSignature sig;
    std::int32_t label;
    bool operator==(const JointKey&) const = default;
  };
  struct JointHash {
    std::size_t operator()(const JointKey& k) const noexcept {
      return SignatureHash{}(k.sig) * 1000003u ^
             static_cast<std::size_t>(k.label);
    }
  };

  std::vector<std::optional<NeighborhoodSignature>> signatures_;
  std::unordered_map<NeighborhoodSignature, std::int64_t, SignatureHash>
      signature_counts_;
  std::unordered_map<JointKey, std::int64_t, JointHash> joint_counts_;
  std::int64_t population_ = 0;
};

// Causal bootstrapping weight for a known-label neighbor with a non-empty
// signature: count(sig match) / (N_pop * count(sig and label match)), the
// inverse conditional density 1 / (N_pop * p(v | U)) estimated with
// Kronecker-delta kernels. Always in [1/N_pop, 1].
double causal_weight(const SignatureTable& table, const KnownLabels& known,
                     NodeId neighbor);

}  // namespace fsmirl
