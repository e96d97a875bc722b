#include "fsmirl/rng.hpp"

#include <stdexcept>

namespace fsmirl::rng {

std::vector<std::size_t> Engine::sample_indices(std::size_t n, std::size_t k) {
  if (k > n) k = n;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_int(n - i));
    std::swap(idx[i], idx[j]);
    out.push_back(idx[i]);
  }
  return out;
}

std::size_t weighted_index(Engine& eng, std::span<const double> weights,
                           double total) {
  if (weights.empty() || total <= 0.0) {
    throw std::invalid_argument("weighted_index: empty or zero-mass weights");
  }
  const double u = eng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;  // zero-mass entries are never drawn
    last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  if (last_positive == weights.size()) {
    throw std::invalid_argument("weighted_index: no positive weight");
  }
  // u fell into the rounding gap past the last prefix sum.
  return last_positive;
}

}  // namespace fsmirl::rng
