#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fsmirl/encoder.hpp"
#include "fsmirl/graph.hpp"
#include "fsmirl/hsic.hpp"
#include "fsmirl/kernels.hpp"
#include "fsmirl/rng.hpp"
#include "fsmirl/sampler.hpp"
#include "fsmirl/shift.hpp"
#include "fsmirl/signatures.hpp"
#include "fsmirl/split.hpp"

namespace {

using namespace fsmirl;

SyntheticGeo make_bundle(int blocks, int nodes_per_block) {
  SyntheticGeoConfig cfg;
  cfg.blocks = blocks;
  cfg.nodes_per_block = nodes_per_block;
  cfg.feature_dim = 16;
  cfg.p_in = 0.05;
  cfg.p_out = 0.005;
  return generate_synthetic_geo(cfg, 42);
}

Eigen::MatrixXd random_samples(Eigen::Index n, Eigen::Index d,
                               std::uint64_t seed) {
  rng::Engine eng(seed);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = eng.normal();
  return x;
}

void BM_GramGaussian(benchmark::State& state) {
  const auto n = state.range(0);
  const auto x = random_samples(n, 1, 7);
  const auto spec = KernelSpec::gaussian(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(gram(spec, x));
  state.SetComplexityN(n);
}
BENCHMARK(BM_GramGaussian)->Range(64, 1024)->Complexity();

void BM_HsicBiased(benchmark::State& state) {
  const auto n = state.range(0);
  const auto spec = KernelSpec::gaussian(1.0);
  const auto kx = gram(spec, random_samples(n, 1, 7));
  const auto ky = gram(spec, random_samples(n, 1, 8));
  for (auto _ : state) benchmark::DoNotOptimize(hsic_biased(kx, ky));
  state.SetComplexityN(n);
}
BENCHMARK(BM_HsicBiased)->Range(64, 1024)->Complexity();

void BM_WeightOptimization(benchmark::State& state) {
  const auto n = state.range(0);
  auto x = random_samples(n, 8, 9);
  x.rightCols(4) = x.leftCols(4);
  ReweightConfig cfg;
  cfg.steps = 5;
  cfg.pairs_per_step = 8;
  cfg.holdout_pairs = 4;
  for (auto _ : state) benchmark::DoNotOptimize(optimize_weights(x, cfg));
}
BENCHMARK(BM_WeightOptimization)->Arg(64)->Arg(256);

void BM_SignatureTableBuild(benchmark::State& state) {
  const auto bundle = make_bundle(4, static_cast<int>(state.range(0)) / 4);
  const auto known =
      KnownLabels::from_split(bundle.graph, bundle.split, Role::Train);
  for (auto _ : state)
    benchmark::DoNotOptimize(SignatureTable::build(bundle.graph, known));
}
BENCHMARK(BM_SignatureTableBuild)->Arg(400)->Arg(1600);

void BM_ProfileBuild(benchmark::State& state) {
  const auto bundle = make_bundle(4, static_cast<int>(state.range(0)) / 4);
  const auto known =
      KnownLabels::from_split(bundle.graph, bundle.split, Role::Train);
  const auto table = SignatureTable::build(bundle.graph, known);
  const auto proj = AttentionProjection::init(bundle.graph.feature_dim(), 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        build_profiles(bundle.graph, known, table, proj));
}
BENCHMARK(BM_ProfileBuild)->Arg(400)->Arg(1600);

void BM_NeighborDraws(benchmark::State& state) {
  const auto bundle = make_bundle(4, 100);
  const auto known =
      KnownLabels::from_split(bundle.graph, bundle.split, Role::Train);
  const auto table = SignatureTable::build(bundle.graph, known);
  const auto proj = AttentionProjection::init(bundle.graph.feature_dim(), 3);
  const auto profiles = build_profiles(bundle.graph, known, table, proj);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    for (NodeId v = 0; v < bundle.graph.num_nodes(); ++v) {
      if (profiles[static_cast<std::size_t>(v)].empty()) continue;
      benchmark::DoNotOptimize(
          sample_neighbors(profiles[static_cast<std::size_t>(v)], 10, ++seed));
    }
  }
}
BENCHMARK(BM_NeighborDraws);

void BM_ForwardPass(benchmark::State& state) {
  const auto bundle = make_bundle(4, 100);
  const UniformSampler sampler(bundle.graph);
  const auto params = init_params(bundle.graph.feature_dim(), 64,
                                  bundle.graph.num_classes(), 1);
  std::vector<NodeId> batch;
  for (NodeId v = 0; v < 64; ++v) batch.push_back(v);
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        forward(bundle.graph, batch, params, sampler, 10, ++seed));
}
BENCHMARK(BM_ForwardPass);

void BM_LossAndGrads(benchmark::State& state) {
  const auto bundle = make_bundle(4, 100);
  const UniformSampler sampler(bundle.graph);
  const auto params = init_params(bundle.graph.feature_dim(), 64,
                                  bundle.graph.num_classes(), 1);
  std::vector<NodeId> batch;
  std::vector<std::int32_t> labels;
  for (NodeId v = 0; v < 64; ++v) {
    batch.push_back(v);
    labels.push_back(bundle.graph.label(v));
  }
  const std::vector<double> w2(batch.size(), 1.0);
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(loss_and_grads(bundle.graph, batch, labels,
                                            params, sampler, w2, 1e-3, 10,
                                            ++seed));
}
BENCHMARK(BM_LossAndGrads);

}  // namespace

BENCHMARK_MAIN();
