#include "fsmirl/metrics.hpp"

#include <string>
#include <vector>

#include "fsmirl/types.hpp"

namespace fsmirl {

Metrics compute_metrics(std::span<const std::int32_t> predicted,
                        std::span<const std::int32_t> actual,
                        std::int32_t num_classes) {
  if (predicted.size() != actual.size())
    throw ShapeError("compute_metrics: prediction/label lengths differ");
  if (predicted.empty())
    throw ValidationError("compute_metrics: empty node set");
  if (num_classes <= 0)
    throw ValidationError("compute_metrics: num_classes must be positive");

  const auto c = static_cast<std::size_t>(num_classes);
  std::vector<std::int64_t> tp(c, 0), fp(c, 0), fn(c, 0);
  std::int64_t correct = 0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    const std::int32_t p = predicted[k];
    const std::int32_t a = actual[k];
    if (p < 0 || p >= num_classes || a < 0 || a >= num_classes)
      throw ValidationError("compute_metrics: class id out of range at row " +
                            std::to_string(k));
    if (p == a) {
      ++correct;
      ++tp[static_cast<std::size_t>(p)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(a)];
    }
  }

  Metrics m;
  m.accuracy = static_cast<double>(correct) /
               static_cast<double>(predicted.size());
  m.precision = Eigen::VectorXd::Zero(num_classes);
  m.recall = Eigen::VectorXd::Zero(num_classes);
  m.f1 = Eigen::VectorXd::Zero(num_classes);
  for (std::size_t k = 0; k < c; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double denom_p = static_cast<double>(tp[k] + fp[k]);
    const double denom_r = static_cast<double>(tp[k] + fn[k]);
    m.precision[i] = denom_p > 0 ? static_cast<double>(tp[k]) / denom_p : 0.0;
    m.recall[i] = denom_r > 0 ? static_cast<double>(tp[k]) / denom_r : 0.0;
    const double pr = m.precision[i] + m.recall[i];
    m.f1[i] = pr > 0 ? 2.0 * m.precision[i] * m.recall[i] / pr : 0.0;
  }
  m.macro_f1 = m.f1.mean();
  return m;
}

}  // namespace fsmirl
