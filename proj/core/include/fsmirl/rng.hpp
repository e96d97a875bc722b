#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace fsmirl::rng {

// splitmix64 finalizer. Used to derive independent stream seeds from a run
// seed plus structural coordinates (node id, epoch, layer, ...).
constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ a);
  h = mix(h ^ b);
  h = mix(h ^ c);
  return h;
}

// Stream tags so distinct uses of the same run seed never collide.
enum Stream : std::uint64_t {
  kInit = 0x01,
  kProjection = 0x02,
  kShuffle = 0x03,
  kSampleLayer1 = 0x04,
  kSampleLayer2 = 0x05,
  kReweight = 0x06,
  kEval = 0x07,
  kSplit = 0x08,
  kGenerator = 0x09,
  kEdgeDelete = 0x0a,
  kMedianSubsample = 0x0b,
  kEpoch = 0x0c,
};

// Deterministic random engine. std::mt19937_64 output is fully specified by
// the standard; the distribution helpers below avoid std::*_distribution,
// whose sequences differ between standard library implementations.
class Engine {
public:
  explicit Engine(std::uint64_t seed) : gen_(mix(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound), bias-free via rejection.
  std::uint64_t uniform_int(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  // Standard normal via Box-Muller. The second variate is discarded so the
  // stream position is a pure function of the call count.
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
  std::mt19937_64 gen_;
};

// One draw from the discrete distribution given by nonnegative weights.
// Walks the prefix sums; total must be positive.
std::size_t weighted_index(Engine& eng, std::span<const double> weights,
                           double total);

}  // namespace fsmirl::rng
