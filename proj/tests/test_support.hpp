#pragma once

// Shared fixtures and reference oracles. Every oracle here is a from-scratch
// reimplementation of the documented formula, kept deliberately naive (plain
// loops, integer arithmetic where possible) so it cannot share bugs with the
// library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fsmirl/graph.hpp"
#include "fsmirl/split.hpp"

namespace support {

// ---------------------------------------------------------------------------
// deterministic test-local randomness (never the library's rng)

class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : gen_(seed) {}

  double unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::uint64_t below(std::uint64_t bound) {
    return bound <= 1 ? 0 : gen_() % bound;  // bias irrelevant for tests
  }
  double normal() {
    double u1 = unit();
    while (u1 == 0.0) u1 = unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * unit());
  }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// graph builders

inline fsmirl::Graph make_graph(
    int n, int num_classes, const std::vector<std::pair<int, int>>& edges,
    const std::vector<std::int32_t>& labels, int feature_dim = 3,
    std::uint64_t feature_seed = 7) {
  TestRng rng(feature_seed);
  Eigen::MatrixXd features(n, feature_dim);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < feature_dim; ++d) features(i, d) = rng.normal();
  std::vector<std::pair<fsmirl::NodeId, fsmirl::NodeId>> e;
  e.reserve(edges.size());
  for (const auto& [u, v] : edges)
    e.emplace_back(static_cast<fsmirl::NodeId>(u),
                   static_cast<fsmirl::NodeId>(v));
  return fsmirl::Graph::from_edges(std::move(features), labels, num_classes,
                                   e);
}

inline std::vector<std::pair<int, int>> path_edges(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

inline std::vector<std::pair<int, int>> cycle_edges(int n) {
  auto e = path_edges(n);
  if (n > 2) e.emplace_back(n - 1, 0);
  return e;
}

inline std::vector<std::pair<int, int>> star_edges(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) e.emplace_back(0, i);
  return e;
}

inline std::vector<std::pair<int, int>> complete_edges(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return e;
}

// Erdos-Renyi edges; every node additionally chained to its successor so no
// node is isolated.
inline std::vector<std::pair<int, int>> random_connected_edges(
    int n, double p, std::uint64_t seed) {
  TestRng rng(seed);
  auto e = path_edges(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j)
      if (rng.unit() < p) e.emplace_back(i, j);
  return e;
}

inline std::vector<std::int32_t> round_robin_labels(int n, int num_classes) {
  std::vector<std::int32_t> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i % num_classes;
  return labels;
}

inline std::vector<std::int32_t> random_labels(int n, int num_classes,
                                               std::uint64_t seed) {
  TestRng rng(seed);
  std::vector<std::int32_t> labels(n);
  for (int i = 0; i < n; ++i)
    labels[i] = static_cast<std::int32_t>(
        rng.below(static_cast<std::uint64_t>(num_classes)));
  return labels;
}

// ---------------------------------------------------------------------------
// HSIC oracle: expanded double-sum form of the centered trace.
//
//   Tr(Kx J Ky J) = sum_ij Kx_ij Ky_ij
//                 - (2/n) sum_i (Kx 1)_i (Ky 1)_i
//                 + (1/n^2) (sum Kx)(sum Ky)
//
// computed with bare loops.
inline double hsic_trace_oracle(const Eigen::MatrixXd& kx,
                                const Eigen::MatrixXd& ky) {
  const int n = static_cast<int>(kx.rows());
  double elementwise = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) elementwise += kx(i, j) * ky(i, j);
  double cross = 0.0;
  for (int i = 0; i < n; ++i) {
    double rx = 0.0, ry = 0.0;
    for (int j = 0; j < n; ++j) {
      rx += kx(i, j);
      ry += ky(i, j);
    }
    cross += rx * ry;
  }
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      sx += kx(i, j);
      sy += ky(i, j);
    }
  const double nd = static_cast<double>(n);
  return elementwise - (2.0 / nd) * cross + (sx * sy) / (nd * nd);
}

inline double hsic_biased_oracle(const Eigen::MatrixXd& kx,
                                 const Eigen::MatrixXd& ky) {
  const double n = static_cast<double>(kx.rows());
  return hsic_trace_oracle(kx, ky) / (n * n);
}

inline double hsic_scaled_oracle(const Eigen::MatrixXd& kx,
                                 const Eigen::MatrixXd& ky) {
  const double n = static_cast<double>(kx.rows());
  return hsic_trace_oracle(kx, ky) / ((n - 1.0) * (n - 1.0));
}

// ---------------------------------------------------------------------------
// neighborhood-signature and causal-weight oracle, pure integer arithmetic

struct OracleSignature {
  std::vector<int> quarters;
  int degree_bucket = 0;
  bool valid = false;  // false when the node has no known-label neighbor

  friend bool operator==(const OracleSignature&,
                         const OracleSignature&) = default;
};

// Histogram proportions quantized to quarters by round-half-up:
// q_c = floor(4 * count_c / known_deg + 1/2) = (8 count_c + known_deg) div
// (2 known_deg). Degree bucket is floor(log2 degree) over the full degree.
inline OracleSignature signature_oracle(const fsmirl::Graph& g,
                                        fsmirl::NodeId v,
                                        const fsmirl::KnownLabels& known) {
  OracleSignature sig;
  std::vector<std::int64_t> counts(g.num_classes(), 0);
  std::int64_t known_deg = 0;
  for (fsmirl::NodeId u : g.neighbors(v)) {
    const auto lbl = known.label(u);
    if (lbl) {
      ++counts[static_cast<std::size_t>(*lbl)];
      ++known_deg;
    }
  }
  if (known_deg == 0) return sig;
  sig.valid = true;
  sig.quarters.resize(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c)
    sig.quarters[c] =
        static_cast<int>((8 * counts[c] + known_deg) / (2 * known_deg));
  int bucket = 0;
  for (std::int64_t d = g.degree(v); d > 1; d /= 2) ++bucket;
  sig.degree_bucket = bucket;
  return sig;
}

struct CausalWeightOracle {
  double weight = 0.0;
  std::int64_t marginal = 0;
  std::int64_t joint = 0;
  std::int64_t population = 0;
};

// Recounts everything from scratch over the known-label population:
//   weight = p(sig) / (N * p(sig, label)) = marginal / (N * joint).
inline CausalWeightOracle causal_weight_oracle(
    const fsmirl::Graph& g, const fsmirl::KnownLabels& known,
    fsmirl::NodeId neighbor) {
  CausalWeightOracle result;
  const OracleSignature target = signature_oracle(g, neighbor, known);
  const auto target_label = known.label(neighbor);
  if (!target.valid || !target_label) return result;
  for (fsmirl::NodeId u = 0; u < g.num_nodes(); ++u) {
    const auto lbl = known.label(u);
    if (!lbl) continue;
    ++result.population;
    const OracleSignature sig = signature_oracle(g, u, known);
    if (!sig.valid) continue;
    if (sig == target) {
      ++result.marginal;
      if (*lbl == *target_label) ++result.joint;
    }
  }
  if (result.joint > 0) {
    result.weight = static_cast<double>(result.marginal) /
                    (static_cast<double>(result.population) *
                     static_cast<double>(result.joint));
  }
  return result;
}

// ---------------------------------------------------------------------------
// misc numeric oracles

inline std::vector<double> softmax_oracle(const std::vector<double>& scores) {
  std::vector<double> out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i]);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Welch two-sample t statistic.
inline double welch_t(const std::vector<double>& a,
                      const std::vector<double>& b) {
  const auto stats = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    s2 /= static_cast<double>(v.size() - 1);
    return std::pair<double, double>(m, s2);
  };
  const auto [ma, va] = stats(a);
  const auto [mb, vb] = stats(b);
  return (ma - mb) / std::sqrt(va / static_cast<double>(a.size()) +
                               vb / static_cast<double>(b.size()));
}

inline double quantile_sorted(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace support
