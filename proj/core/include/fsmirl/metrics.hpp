#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace fsmirl {

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  Eigen::VectorXd precision;  // per class
  Eigen::VectorXd recall;     // per class
  Eigen::VectorXd f1;         // per class
};

// Accuracy and macro-F1 over C classes. Classes absent from both predictions
// and truth contribute F1 = 0 to the macro mean (0/0 convention).
Metrics compute_metrics(std::span<const std::int32_t> predicted,
                        std::span<const std::int32_t> actual,
                        std::int32_t num_classes);

}  // namespace fsmirl
