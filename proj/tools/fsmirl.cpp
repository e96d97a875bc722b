#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fsmirl/config.hpp"
#include "fsmirl/encoder.hpp"
#include "fsmirl/experiment.hpp"
#include "fsmirl/graph.hpp"
#include "fsmirl/io.hpp"
#include "fsmirl/rng.hpp"
#include "fsmirl/sampler.hpp"
#include "fsmirl/shift.hpp"
#include "fsmirl/signatures.hpp"
#include "fsmirl/split.hpp"
#include "fsmirl/types.hpp"

namespace fs = std::filesystem;
using namespace fsmirl;

namespace {

struct Dataset {
  Graph graph;
  SplitAssignment split;
  std::optional<Graph> variant;  // structural or synthetic shift target
};

// Base graph + split + optional shifted variant for one data seed, mirroring
// what a single benchmark repetition trains and evaluates on.
Dataset acquire(const ExperimentConfig& cfg) {
  const std::uint64_t data_seed = cfg.shift.seed;
  if (cfg.shift.kind == ShiftSpec::Kind::Synthetic) {
    SyntheticGeo geo = generate_synthetic_geo(cfg.shift.synthetic, data_seed);
    return {std::move(geo.graph), std::move(geo.split),
            std::move(geo.test_variant)};
  }
  std::optional<SyntheticGeo> geo;
  std::optional<Graph> loaded;
  if (cfg.data.kind == DataSpec::Kind::Synthetic) {
    geo = generate_synthetic_geo(cfg.data.synthetic, data_seed);
  } else {
    loaded = load_graph(cfg.data.nodes_path, cfg.data.edges_path);
  }
  const Graph& base = geo ? geo->graph : *loaded;
  SplitAssignment split(0);
  if (cfg.shift.kind == ShiftSpec::Kind::FeatureBias) {
    split = biased_split(base, cfg.shift.level, cfg.data.per_class_train,
                         data_seed, cfg.data.test_count, cfg.data.val_count);
  } else if (geo) {
    split = geo->split;
  } else {
    split = biased_split(base, BiasLevel::None, cfg.data.per_class_train,
                         data_seed, cfg.data.test_count, cfg.data.val_count);
  }
  std::optional<Graph> variant;
  if (cfg.shift.kind == ShiftSpec::Kind::Structural)
    variant = delete_edges(base, cfg.shift.edge_fraction, data_seed);
  return {geo ? std::move(geo->graph) : std::move(*loaded), std::move(split),
          std::move(variant)};
}

fs::path ensure_out(const std::string& out_dir) {
  fs::path dir(out_dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::json metrics_json(const Metrics& m) {
  return {{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path.string());
  out << text;
  if (!out) throw ValidationError("write failed for " + path.string());
}

void print_split_counts(const SplitAssignment& split) {
  std::cout << "train=" << split.count(Role::Train)
            << " validation=" << split.count(Role::Validation)
            << " test=" << split.count(Role::Test)
            << " unused=" << split.count(Role::Unused) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OOD node classification: shift fabrication, training, benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed_flag = 0;
  int threads_flag = 1;
  bool no_wallclock = false;
  auto* seed_opt = app.add_option("--seed", seed_flag,
                                  "seed for both training and data fabrication");
  auto* threads_opt =
      app.add_option("--threads", threads_flag, "worker threads for bench");
  app.add_option("--config", config_path, "config file, json or toml subset");
  app.add_option("--out", out_dir, "output directory [.]");
  app.add_flag("--no-wallclock", no_wallclock,
               "zero wall_s fields so reports are byte-stable");
  app.fallthrough();

  auto* convert_cmd =
      app.add_subcommand("convert", "citation corpus to nodes/edges TSV");
  std::string content_path, cites_path;
  convert_cmd->add_option("--content", content_path, "raw content file")
      ->required();
  convert_cmd->add_option("--cites", cites_path, "raw cites file")->required();

  auto* split_cmd =
      app.add_subcommand("split", "emit the split file for the configured shift");
  auto* shift_cmd =
      app.add_subcommand("shift", "apply the configured shift, write outputs");
  auto* synth_cmd =
      app.add_subcommand("synth", "generate the synthetic geo dataset");
  auto* train_cmd = app.add_subcommand("train", "train one model");
  bool dump_profiles = false;
  train_cmd->add_flag("--dump-profiles", dump_profiles,
                      "also write neighbor sampling profiles as json");
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string checkpoint_path;
  std::string eval_on = "original";
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint json")
      ->required();
  eval_cmd->add_option("--on", eval_on,
                       "evaluation graph: original or variant [original]")
      ->check(CLI::IsMember({"original", "variant"}));
  auto* bench_cmd =
      app.add_subcommand("bench", "run the 2x2 ablation grid, emit reports");
  int reps_flag = 0;
  bench_cmd->add_option("--reps", reps_flag, "repetitions per model");
  auto* report_cmd =
      app.add_subcommand("report", "reprint a report json as csv or json");
  std::string report_in;
  std::string report_format = "csv";
  report_cmd->add_option("--in", report_in, "report json path")->required();
  report_cmd->add_option("--format", report_format, "csv or json [csv]")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) apply_config(cfg, parse_config_file(config_path));
    if (seed_opt->count() > 0) {
      cfg.train.seed = seed_flag;
      cfg.shift.seed = seed_flag;
    }
    if (threads_opt->count() > 0) cfg.threads = threads_flag;
    if (no_wallclock) cfg.wallclock = false;

    if (convert_cmd->parsed()) {
      const fs::path dir = ensure_out(out_dir);
      const auto [nodes, edges] = convert_citation_corpus(
          content_path, cites_path, dir / "nodes.tsv", dir / "edges.tsv");
      std::cout << "wrote " << (dir / "nodes.tsv").string() << " (" << nodes
                << " nodes), " << (dir / "edges.tsv").string() << " (" << edges
                << " edges)\n";
      return 0;
    }

    if (report_cmd->parsed()) {
      std::ifstream in(report_in, std::ios::binary);
      if (!in) throw ValidationError("cannot open " + report_in);
      nlohmann::json j;
      in >> j;
      const Report report = report_from_json(j);
      if (report_format == "csv")
        std::cout << report_to_csv(report);
      else
        std::cout << report_to_json(report).dump(2) << "\n";
      return 0;
    }

    if (synth_cmd->parsed()) {
      const fs::path dir = ensure_out(out_dir);
      const SyntheticGeo geo =
          generate_synthetic_geo(cfg.data.synthetic, cfg.shift.seed);
      save_graph(geo.graph, dir / "nodes.tsv", dir / "edges.tsv");
      save_split(geo.split, dir / "split.tsv");
      save_graph(geo.test_variant, dir / "variant_nodes.tsv",
                 dir / "variant_edges.tsv");
      std::cout << "nodes=" << geo.graph.num_nodes()
                << " edges=" << geo.graph.num_undirected_edges()
                << " variant_edges=" << geo.test_variant.num_undirected_edges()
                << "\n";
      print_split_counts(geo.split);
      return 0;
    }

    if (split_cmd->parsed()) {
      const fs::path dir = ensure_out(out_dir);
      const Dataset data = acquire(cfg);
      save_split(data.split, dir / "split.tsv");
      std::cout << "wrote " << (dir / "split.tsv").string() << "\n";
      print_split_counts(data.split);
      return 0;
    }

    if (shift_cmd->parsed()) {
      const fs::path dir = ensure_out(out_dir);
      const Dataset data = acquire(cfg);
      save_split(data.split, dir / "split.tsv");
      std::cout << "wrote " << (dir / "split.tsv").string() << "\n";
      if (data.variant) {
        save_graph(*data.variant, dir / "variant_nodes.tsv",
                   dir / "variant_edges.tsv");
        std::cout << "wrote variant graph with "
                  << data.variant->num_undirected_edges() << " edges\n";
      } else if (cfg.shift.kind == ShiftSpec::Kind::None) {
        save_graph(data.graph, dir / "nodes.tsv", dir / "edges.tsv");
        std::cout << "wrote unmodified graph\n";
      }
      return 0;
    }

    if (train_cmd->parsed()) {
      const fs::path dir = ensure_out(out_dir);
      const Dataset data = acquire(cfg);
      const TrainResult result = train(data.graph, data.split, cfg.train);
      write_history_csv((dir / "history.csv").string(), result.history);
      const std::string hash = fnv1a_hex(config_snapshot(cfg).dump());
      save_checkpoint((dir / "checkpoint.json").string(), result.params,
                      cfg.train.seed, hash);
      if (dump_profiles) {
        const KnownLabels known =
            KnownLabels::from_split(data.graph, data.split, Role::Train);
        const SignatureTable table = SignatureTable::build(data.graph, known);
        const AttentionProjection proj =
            AttentionProjection::init(data.graph.feature_dim(), cfg.train.seed);
        const auto profiles = build_profiles(data.graph, known, table, proj);
        write_text(dir / "profiles.json", profiles_to_json(profiles).dump(2));
      }
      if (result.aborted) {
        std::cerr << "training aborted: " << result.abort_reason << "\n";
        return 1;
      }
      const Metrics test =
          evaluate_on_split(data.graph, data.split, result.params, cfg.train);
      nlohmann::json summary = metrics_json(test);
      summary["epochs"] = result.history.size();
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      const fs::path dir = ensure_out(out_dir);
      const Dataset data = acquire(cfg);
      const Checkpoint ck = load_checkpoint(checkpoint_path);
      const Graph* eval_g = &data.graph;
      if (eval_on == "variant") {
        if (!data.variant)
          throw ValidationError("eval --on variant: shift has no variant graph");
        eval_g = &*data.variant;
      }
      TrainConfig tc = cfg.train;
      tc.seed = ck.seed;
      const Metrics m = evaluate_on_split(*eval_g, data.split, ck.params, tc);
      const nlohmann::json j = metrics_json(m);
      write_text(dir / "metrics.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (bench_cmd->parsed()) {
      const fs::path dir = ensure_out(out_dir);
      if (reps_flag > 0) cfg.seeds = reps_flag;
      Report report = run_bench(cfg.data, cfg.shift, cfg.train, cfg.seeds,
                                cfg.threads, cfg.wallclock);
      finalize_report(report, cfg);
      emit_report(report, (dir / "report.json").string(), ReportFormat::Json);
      emit_report(report, (dir / "report.csv").string(), ReportFormat::Csv);
      for (const auto& cr : report.conditions) {
        std::printf("%-12s %-16s acc %.4f +- %.4f  f1 %.4f +- %.4f%s\n",
                    cr.condition.c_str(), cr.model.c_str(), cr.mean_accuracy(),
                    cr.std_accuracy(), cr.mean_macro_f1(), cr.std_macro_f1(),
                    cr.failed ? "  FAILED" : "");
        if (cr.failed) std::printf("  reason: %s\n", cr.failure.c_str());
      }
      std::cout << "wrote " << (dir / "report.json").string() << " and "
                << (dir / "report.csv").string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
