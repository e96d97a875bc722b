#include "fsmirl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <thread>
#include <utility>

#include "fsmirl/graph.hpp"
#include "fsmirl/io.hpp"
#include "fsmirl/metrics.hpp"
#include "fsmirl/rng.hpp"
#include "fsmirl/sampler.hpp"
#include "fsmirl/signatures.hpp"
#include "fsmirl/split.hpp"
#include "fsmirl/types.hpp"

namespace fsmirl {

namespace {

double mean_of(const std::vector<RunMetrics>& runs, double RunMetrics::*field) {
  if (runs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : runs) sum += r.*field;
  return sum / static_cast<double>(runs.size());
}

double std_of(const std::vector<RunMetrics>& runs, double RunMetrics::*field) {
  if (runs.size() < 2) return 0.0;
  const double mu = mean_of(runs, field);
  double ss = 0.0;
  for (const auto& r : runs) {
    const double d = r.*field - mu;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(runs.size() - 1));
}

class Stopwatch {
 public:
  double elapsed_s() const {
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(now - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

struct CondOutcome {
  std::optional<RunMetrics> metrics;
  std::string error;
};

EncoderParams train_or_throw(const Graph& g, const SplitAssignment& split,
                             const TrainConfig& cfg) {
  TrainResult result = train(g, split, cfg);
  if (result.aborted)
    throw ValidationError("training aborted: " + result.abort_reason);
  return std::move(result.params);
}

}  // namespace

// The sampler is rebuilt on the evaluation graph with the same train-visible
// labels and the same projection seed the trainer used, so a structurally
// shifted graph gets fresh profiles for unchanged parameters.
Metrics evaluate_on_split(const Graph& eval_g, const SplitAssignment& split,
                          const EncoderParams& params, const TrainConfig& cfg) {
  const std::vector<NodeId> test_nodes = split.nodes_with(Role::Test);
  if (test_nodes.empty())
    throw ValidationError("experiment: split has no test nodes");
  std::vector<std::int32_t> labels(test_nodes.size());
  for (std::size_t i = 0; i < test_nodes.size(); ++i)
    labels[i] = eval_g.label(test_nodes[i]);

  std::unique_ptr<NeighborSampler> sampler;
  if (cfg.use_ca_sampling) {
    const KnownLabels known = KnownLabels::from_split(eval_g, split, Role::Train);
    const SignatureTable table = SignatureTable::build(eval_g, known);
    const AttentionProjection proj =
        AttentionProjection::init(eval_g.feature_dim(), cfg.seed);
    sampler = std::make_unique<ProfileSampler>(
        build_profiles(eval_g, known, table, proj));
  } else {
    sampler = std::make_unique<UniformSampler>(eval_g);
  }
  return evaluate(params, eval_g, test_nodes, labels, *sampler,
                  cfg.sample_size, rng::derive(cfg.seed, rng::kEval, 0, 1));
}

namespace {

RunMetrics make_row(std::uint64_t seed, const Metrics& m, double wall_s,
                    bool include_wall) {
  RunMetrics row;
  row.seed = seed;
  row.accuracy = m.accuracy;
  row.macro_f1 = m.macro_f1;
  row.wall_s = include_wall ? wall_s : 0.0;
  return row;
}

// One (model, seed) repetition across every condition of the shift.
// file_graph is non-null only for file-backed data; synthetic graphs are
// regenerated here so repetitions stay independent tasks.
std::vector<CondOutcome> run_one(const Graph* file_graph, const DataSpec& data,
                                 const ShiftSpec& shift, bool use_ca,
                                 bool use_hsic, const TrainConfig& base_cfg,
                                 int run_index, bool include_wall) {
  const std::size_t n_cond = condition_names(shift).size();
  std::vector<CondOutcome> out(n_cond);
  const auto fail_from = [&out](std::size_t first, const std::string& why) {
    for (std::size_t c = first; c < out.size(); ++c)
      if (!out[c].metrics && out[c].error.empty()) out[c].error = why;
  };

  TrainConfig cfg = base_cfg;
  cfg.seed = base_cfg.seed + static_cast<std::uint64_t>(run_index);
  cfg.use_ca_sampling = use_ca;
  cfg.use_hsic_weights = use_hsic;
  const std::uint64_t data_seed =
      shift.seed + static_cast<std::uint64_t>(run_index);

  if (shift.kind == ShiftSpec::Kind::Synthetic) {
    try {
      const SyntheticGeo geo = generate_synthetic_geo(shift.synthetic, data_seed);
      const Stopwatch watch;
      const EncoderParams params = train_or_throw(geo.graph, geo.split, cfg);
      const Metrics original = evaluate_on_split(geo.graph, geo.split, params, cfg);
      out[0].metrics =
          make_row(cfg.seed, original, watch.elapsed_s(), include_wall);
      const Stopwatch shifted_watch;
      const Metrics shifted = evaluate_on_split(geo.test_variant, geo.split, params, cfg);
      out[1].metrics =
          make_row(cfg.seed, shifted, shifted_watch.elapsed_s(), include_wall);
    } catch (const std::exception& e) {
      fail_from(0, e.what());
    }
    return out;
  }

  std::optional<SyntheticGeo> generated;
  const Graph* base = file_graph;
  std::optional<SplitAssignment> split;
  try {
    if (data.kind == DataSpec::Kind::Synthetic) {
      generated = generate_synthetic_geo(data.synthetic, data_seed);
      base = &generated->graph;
    }
    if (base == nullptr)
      throw ValidationError("experiment: no base graph for this shift");
    if (shift.kind == ShiftSpec::Kind::FeatureBias) {
      split = biased_split(*base, shift.level, data.per_class_train, data_seed,
                           data.test_count, data.val_count);
    } else if (data.kind == DataSpec::Kind::Synthetic) {
      split = generated->split;
    } else {
      split = biased_split(*base, BiasLevel::None, data.per_class_train,
                           data_seed, data.test_count, data.val_count);
    }
  } catch (const std::exception& e) {
    fail_from(0, e.what());
    return out;
  }

  if (shift.kind == ShiftSpec::Kind::None ||
      shift.kind == ShiftSpec::Kind::FeatureBias) {
    try {
      const Stopwatch watch;
      const EncoderParams params = train_or_throw(*base, *split, cfg);
      const Metrics m = evaluate_on_split(*base, *split, params, cfg);
      out[0].metrics = make_row(cfg.seed, m, watch.elapsed_s(), include_wall);
    } catch (const std::exception& e) {
      fail_from(0, e.what());
    }
    return out;
  }

  // Structural shift: train on the intact and on the thinned graph, then a
  // cross condition that evaluates the intact-graph model on thinned edges.
  std::optional<Graph> thinned;
  try {
    thinned = delete_edges(*base, shift.edge_fraction, data_seed);
  } catch (const std::exception& e) {
    fail_from(0, e.what());
    return out;
  }
  std::optional<EncoderParams> intact_params;
  try {
    const Stopwatch watch;
    intact_params = train_or_throw(*base, *split, cfg);
    const Metrics m = evaluate_on_split(*base, *split, *intact_params, cfg);
    out[0].metrics = make_row(cfg.seed, m, watch.elapsed_s(), include_wall);
  } catch (const std::exception& e) {
    out[0].error = e.what();
  }
  try {
    const Stopwatch watch;
    const EncoderParams params = train_or_throw(*thinned, *split, cfg);
    const Metrics m = evaluate_on_split(*thinned, *split, params, cfg);
    out[1].metrics = make_row(cfg.seed, m, watch.elapsed_s(), include_wall);
  } catch (const std::exception& e) {
    out[1].error = e.what();
  }
  if (intact_params) {
    try {
      const Stopwatch watch;
      const Metrics m = evaluate_on_split(*thinned, *split, *intact_params, cfg);
      out[2].metrics = make_row(cfg.seed, m, watch.elapsed_s(), include_wall);
    } catch (const std::exception& e) {
      out[2].error = e.what();
    }
  } else {
    out[2].error = out[0].error;
  }
  return out;
}

Report run_grid(const DataSpec& data, const ShiftSpec& shift,
                const std::vector<std::pair<bool, bool>>& models,
                const TrainConfig& cfg, int n_seeds, int threads,
                bool include_wall) {
  if (n_seeds < 1) throw ConfigError("experiment: n_seeds must be >= 1");
  if (threads < 1) throw ConfigError("experiment: threads must be >= 1");

  std::optional<Graph> loaded;
  const Graph* file_graph = nullptr;
  if (shift.kind != ShiftSpec::Kind::Synthetic &&
      data.kind == DataSpec::Kind::Files) {
    loaded = load_graph(data.nodes_path, data.edges_path);
    file_graph = &*loaded;
  }

  const std::vector<std::string> conditions = condition_names(shift);
  struct Task {
    std::size_t model;
    int run;
  };
  std::vector<Task> tasks;
  tasks.reserve(models.size() * static_cast<std::size_t>(n_seeds));
  for (std::size_t m = 0; m < models.size(); ++m)
    for (int i = 0; i < n_seeds; ++i) tasks.push_back({m, i});

  std::vector<std::vector<std::vector<CondOutcome>>> slots(
      models.size(), std::vector<std::vector<CondOutcome>>(
                         static_cast<std::size_t>(n_seeds)));
  const auto work = [&](const Task& t) {
    std::vector<CondOutcome> result;
    try {
      result = run_one(file_graph, data, shift, models[t.model].first,
                       models[t.model].second, cfg, t.run, include_wall);
    } catch (const std::exception& e) {
      result.assign(conditions.size(), CondOutcome{});
      for (auto& c : result) c.error = e.what();
    }
    slots[t.model][static_cast<std::size_t>(t.run)] = std::move(result);
  };

  const int worker_count =
      std::min<int>(threads, static_cast<int>(tasks.size()));
  if (worker_count <= 1) {
    for (const Task& t : tasks) work(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(worker_count));
    for (int w = 0; w < worker_count; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t k = next.fetch_add(1);
          if (k >= tasks.size()) return;
          work(tasks[k]);
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  Report report;
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    for (std::size_t m = 0; m < models.size(); ++m) {
      ConditionResult cr;
      cr.condition = conditions[c];
      cr.use_ca = models[m].first;
      cr.use_hsic = models[m].second;
      cr.model = model_name(cr.use_ca, cr.use_hsic);
      for (int i = 0; i < n_seeds; ++i) {
        const CondOutcome& o = slots[m][static_cast<std::size_t>(i)][c];
        if (o.metrics) {
          cr.runs.push_back(*o.metrics);
        } else {
          cr.failed = true;
          if (cr.failure.empty()) cr.failure = o.error;
        }
      }
      report.conditions.push_back(std::move(cr));
    }
  }
  return report;
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

}  // namespace

double ConditionResult::mean_accuracy() const {
  return mean_of(runs, &RunMetrics::accuracy);
}
double ConditionResult::std_accuracy() const {
  return std_of(runs, &RunMetrics::accuracy);
}
double ConditionResult::mean_macro_f1() const {
  return mean_of(runs, &RunMetrics::macro_f1);
}
double ConditionResult::std_macro_f1() const {
  return std_of(runs, &RunMetrics::macro_f1);
}

std::string model_name(bool use_ca, bool use_hsic) {
  if (use_ca && use_hsic) return "FSM-IRL";
  if (use_ca) return "CA-GraphSAGE";
  if (use_hsic) return "HSIC-GraphSAGE";
  return "GraphSAGE";
}

std::vector<std::string> condition_names(const ShiftSpec& shift) {
  switch (shift.kind) {
    case ShiftSpec::Kind::None:
      return {"original"};
    case ShiftSpec::Kind::FeatureBias:
      return {std::string("bias-") + bias_level_name(shift.level)};
    case ShiftSpec::Kind::Structural: {
      const int pct =
          static_cast<int>(std::llround(shift.edge_fraction * 100.0));
      return {"original", "de-" + std::to_string(pct), "bias"};
    }
    case ShiftSpec::Kind::Synthetic:
      return {"original", "shifted"};
  }
  throw ConfigError("experiment: unknown shift kind");
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

Report run_experiment(const DataSpec& data, const ShiftSpec& shift,
                      bool use_ca, bool use_hsic, const TrainConfig& cfg,
                      int n_seeds) {
  return run_grid(data, shift, {{use_ca, use_hsic}}, cfg, n_seeds, 1, true);
}

Report run_bench(const DataSpec& data, const ShiftSpec& shift,
                 const TrainConfig& cfg, int n_seeds, int threads,
                 bool include_wall) {
  const std::vector<std::pair<bool, bool>> grid = {
      {false, false}, {true, false}, {false, true}, {true, true}};
  return run_grid(data, shift, grid, cfg, n_seeds, threads, include_wall);
}

nlohmann::json report_to_json(const Report& report) {
  nlohmann::json j;
  j["config_hash"] = report.config_hash;
  j["config"] = report.config;
  j["conditions"] = nlohmann::json::array();
  for (const auto& cr : report.conditions) {
    nlohmann::json c;
    c["condition"] = cr.condition;
    c["model"] = cr.model;
    c["use_ca"] = cr.use_ca;
    c["use_hsic"] = cr.use_hsic;
    c["runs"] = nlohmann::json::array();
    for (const auto& r : cr.runs) {
      c["runs"].push_back({{"seed", r.seed},
                           {"acc", round4(r.accuracy)},
                           {"macro_f1", round4(r.macro_f1)},
                           {"wall_s", round4(r.wall_s)}});
    }
    c["mean_acc"] = round4(cr.mean_accuracy());
    c["std_acc"] = round4(cr.std_accuracy());
    c["mean_macro_f1"] = round4(cr.mean_macro_f1());
    c["std_macro_f1"] = round4(cr.std_macro_f1());
    c["failed"] = cr.failed;
    c["failure"] = cr.failure;
    j["conditions"].push_back(std::move(c));
  }
  return j;
}

Report report_from_json(const nlohmann::json& j) {
  Report report;
  try {
    report.config_hash = j.at("config_hash").get<std::string>();
    report.config = j.at("config");
    for (const auto& c : j.at("conditions")) {
      ConditionResult cr;
      cr.condition = c.at("condition").get<std::string>();
      cr.model = c.at("model").get<std::string>();
      cr.use_ca = c.at("use_ca").get<bool>();
      cr.use_hsic = c.at("use_hsic").get<bool>();
      for (const auto& r : c.at("runs")) {
        RunMetrics row;
        row.seed = r.at("seed").get<std::uint64_t>();
        row.accuracy = r.at("acc").get<double>();
        row.macro_f1 = r.at("macro_f1").get<double>();
        row.wall_s = r.at("wall_s").get<double>();
        cr.runs.push_back(row);
      }
      cr.failed = c.at("failed").get<bool>();
      cr.failure = c.at("failure").get<std::string>();
      report.conditions.push_back(std::move(cr));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report_from_json: ") + e.what());
  }
  return report;
}

std::string report_to_csv(const Report& report) {
  std::string out = "condition,model,seed,acc,macro_f1,wall_s\n";
  char buf[160];
  for (const auto& cr : report.conditions) {
    for (const auto& r : cr.runs) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%.4f,%.4f,%.4f\n",
                    cr.condition.c_str(), cr.model.c_str(),
                    static_cast<unsigned long long>(r.seed), r.accuracy,
                    r.macro_f1, r.wall_s);
      out += buf;
    }
  }
  return out;
}

void emit_report(const Report& report, const std::string& path,
                 ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("emit_report: cannot open " + path);
  if (format == ReportFormat::Json) {
    out << report_to_json(report).dump(2) << '\n';
  } else {
    out << report_to_csv(report);
  }
  if (!out) throw ValidationError("emit_report: write failed for " + path);
}

}  // namespace fsmirl
