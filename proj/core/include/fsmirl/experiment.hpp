#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsmirl/encoder.hpp"
#include "fsmirl/shift.hpp"

namespace fsmirl {

// Where the base graph comes from. Files are the node/edge TSV pair;
// Synthetic uses the block-model generator (ignored when the shift itself
// is synthetic, which carries its own generator config).
struct DataSpec {
  enum class Kind : std::uint8_t { Files, Synthetic };
  Kind kind = Kind::Synthetic;
  std::string nodes_path;
  std::string edges_path;
  int per_class_train = 20;
  int test_count = 1000;
  int val_count = 500;
  SyntheticGeoConfig synthetic;
};

struct RunMetrics {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double wall_s = 0.0;
};

struct ConditionResult {
  std::string condition;
  std::string model;
  bool use_ca = false;
  bool use_hsic = false;
  std::vector<RunMetrics> runs;  // successful runs, ordered by seed
  bool failed = false;           // some run aborted
  std::string failure;           // first abort reason

  double mean_accuracy() const;
  double std_accuracy() const;  // sample std, 0 for fewer than 2 runs
  double mean_macro_f1() const;
  double std_macro_f1() const;
};

// conditions are ordered condition-major, model-minor. config and
// config_hash are filled by the caller that knows the full invocation
// (see finalize_report in config.hpp).
struct Report {
  std::string config_hash;
  nlohmann::json config = nlohmann::json::object();
  std::vector<ConditionResult> conditions;
};

// GraphSAGE / CA-GraphSAGE / HSIC-GraphSAGE / FSM-IRL by ablation flags.
std::string model_name(bool use_ca, bool use_hsic);

// Condition ids produced for a shift kind, in report order.
std::vector<std::string> condition_names(const ShiftSpec& shift);

std::string fnv1a_hex(std::string_view bytes);

// Test-split metrics on eval_g, with the neighbor sampler rebuilt on eval_g
// from train-visible labels and the projection seeded by cfg.seed. Honors
// cfg.use_ca_sampling and cfg.sample_size.
Metrics evaluate_on_split(const Graph& eval_g, const SplitAssignment& split,
                          const EncoderParams& params, const TrainConfig& cfg);

// One model over all conditions of the shift, n_seeds repetitions. Run i
// trains with cfg.seed + i and fabricates data with shift.seed + i.
Report run_experiment(const DataSpec& data, const ShiftSpec& shift,
                      bool use_ca, bool use_hsic, const TrainConfig& cfg,
                      int n_seeds);

// Full 2x2 ablation grid. Runs are independent (model, seed) tasks pulled
// from a shared queue; results land in preassigned slots, so the report is
// identical for any thread count. include_wall=false zeroes wall_s, which
// makes reports byte-comparable across timings.
Report run_bench(const DataSpec& data, const ShiftSpec& shift,
                 const TrainConfig& cfg, int n_seeds, int threads,
                 bool include_wall);

enum class ReportFormat : std::uint8_t { Json, Csv };

nlohmann::json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);
std::string report_to_csv(const Report& report);
void emit_report(const Report& report, const std::string& path,
                 ReportFormat format);

}  // namespace fsmirl
