#pragma once

#include <cstdint>
#include <string>

#include "fsmirl/graph.hpp"
#include "fsmirl/split.hpp"

namespace fsmirl {

enum class BiasLevel : std::uint8_t { None, Small, Medium, Big };

const char* bias_level_name(BiasLevel level);
BiasLevel bias_level_from_name(const std::string& name);

// Sampling temperature for the level: train nodes are drawn per class with
// probability proportional to softmax(-homogeneity / tau), so small tau
// concentrates the draw on the low-homogeneity tail. None means uniform.
double bias_tau(BiasLevel level);

// Feature-shift split: per-class train nodes preferentially from
// low-homogeneity neighborhoods; test and validation preferentially from
// high-homogeneity ones, drawn from what remains. Isolated nodes stay
// unused (homogeneity is undefined for them).
SplitAssignment biased_split(const Graph& g, BiasLevel level,
                             int per_class_train, std::uint64_t seed,
                             int test_count = 1000, int val_count = 500);

// Stand-in for a geographic-network benchmark: a stochastic block model
// with Gaussian class features and one appended confounder column whose
// label correlation is rho_train on train nodes and rho_test on validation
// and test nodes.
struct SyntheticGeoConfig {
  int blocks = 6;
  int nodes_per_block = 130;
  double p_in = 0.35;
  double p_out = 0.023;
  int feature_dim = 8;  // base columns; the confounder is appended after
  double class_separation = 1.0;
  double rho_train = 0.9;
  double rho_test = 0.0;
  // Test-variant rewiring: 0 keeps the edge parameters, 1 swaps p_in and
  // p_out entirely.
  double structural_mix = 0.5;
  double train_fraction = 0.7;
  double val_fraction = 0.2;
};

struct SyntheticGeo {
  Graph graph;
  SplitAssignment split;
  // Same nodes, features, and labels; edges re-sampled with the mixed
  // (p_in, p_out) parameters. Carries the structural shift.
  Graph test_variant;
};

SyntheticGeo generate_synthetic_geo(const SyntheticGeoConfig& config,
                                    std::uint64_t seed);

// Declarative shift recipe for the experiment harness.
struct ShiftSpec {
  enum class Kind : std::uint8_t { None, FeatureBias, Structural, Synthetic };
  Kind kind = Kind::None;
  BiasLevel level = BiasLevel::None;  // FeatureBias
  double edge_fraction = 0.0;         // Structural
  SyntheticGeoConfig synthetic;       // Synthetic
  std::uint64_t seed = 0;             // data-fabrication seed base
};

}  // namespace fsmirl
