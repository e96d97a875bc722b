#include "fsmirl/config.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "fsmirl/experiment.hpp"
#include "fsmirl/types.hpp"

using namespace fsmirl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() /
                   ("fsmirl_cfg_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  return path.string();
}

}  // namespace

TEST(TomlSubset, SectionsScalarsAndComments) {
  const std::string text = R"(# top comment
seeds = 4
threads = 2          # trailing comment
wallclock = false

[train]
epochs = 11
learning_rate = 0.5
use_hsic_weights = true

[train.reweight]
steps = 9

[data]
kind = "files"
nodes = "n.tsv"      # path with comment after
edges = "dir/e.tsv"

[shift]
kind = "feature_bias"
level = "big"
edge_fraction = 0.25
)";
  const auto j = parse_toml_subset(text, "inline");
  EXPECT_EQ(j["seeds"], 4);
  EXPECT_EQ(j["threads"], 2);
  EXPECT_EQ(j["wallclock"], false);
  EXPECT_EQ(j["train"]["epochs"], 11);
  EXPECT_DOUBLE_EQ(j["train"]["learning_rate"].get<double>(), 0.5);
  EXPECT_EQ(j["train"]["use_hsic_weights"], true);
  EXPECT_EQ(j["train"]["reweight"]["steps"], 9);
  EXPECT_EQ(j["data"]["kind"], "files");
  EXPECT_EQ(j["data"]["nodes"], "n.tsv");
  EXPECT_EQ(j["data"]["edges"], "dir/e.tsv");
  EXPECT_EQ(j["shift"]["kind"], "feature_bias");
  EXPECT_DOUBLE_EQ(j["shift"]["edge_fraction"].get<double>(), 0.25);
}

TEST(TomlSubset, StringEscapesHashInsideQuotesLastWins) {
  const std::string text = R"(
[data]
nodes = "with # hash and = sign"
edges = "tab\there \"quoted\" done"
kind = "files"
kind = "synthetic"
)";
  const auto j = parse_toml_subset(text, "inline");
  EXPECT_EQ(j["data"]["nodes"], "with # hash and = sign");
  EXPECT_EQ(j["data"]["edges"], "tab\there \"quoted\" done");
  EXPECT_EQ(j["data"]["kind"], "synthetic");
}

TEST(TomlSubset, NegativeAndScientificNumbers) {
  const auto j = parse_toml_subset("a = -3\nb = 1e-3\nc = -0.125\n", "inline");
  EXPECT_EQ(j["a"], -3);
  EXPECT_DOUBLE_EQ(j["b"].get<double>(), 1e-3);
  EXPECT_DOUBLE_EQ(j["c"].get<double>(), -0.125);
}

TEST(TomlSubset, ErrorsCarryPathAndLine) {
  try {
    parse_toml_subset("ok = 1\nbroken line\n", "cfg.toml");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("cfg.toml"), std::string::npos);
  }
  EXPECT_THROW(parse_toml_subset("s = \"unterminated\n", "x"), ParseError);
  EXPECT_THROW(parse_toml_subset("a = 1\n[a]\nb = 2\n", "x"), ParseError);
  EXPECT_THROW(parse_toml_subset("[]\n", "x"), ParseError);
  EXPECT_THROW(parse_toml_subset("k =\n", "x"), ParseError);
  EXPECT_THROW(parse_toml_subset("k = 12abc\n", "x"), ParseError);
}

TEST(ConfigFile, SniffsJsonByLeadingBrace) {
  const auto dir = scratch_dir();
  const auto json_path =
      write_file(dir / "c.json", "  \n { \"seeds\": 6, \"train\": {\"epochs\": 2} }");
  const auto j = parse_config_file(json_path);
  EXPECT_EQ(j["seeds"], 6);
  EXPECT_EQ(j["train"]["epochs"], 2);

  const auto toml_path = write_file(dir / "c.toml", "seeds = 9\n");
  EXPECT_EQ(parse_config_file(toml_path)["seeds"], 9);

  const auto bad_json = write_file(dir / "bad.json", "{ seeds: }");
  EXPECT_THROW(parse_config_file(bad_json), ParseError);
  EXPECT_THROW(parse_config_file((dir / "missing.toml").string()), ParseError);
  fs::remove_all(dir);
}

TEST(ApplyConfig, OverlaysPresentKeysOnly) {
  ExperimentConfig cfg;
  const double default_lr = cfg.train.learning_rate;
  const int default_hidden = cfg.train.hidden;
  nlohmann::json j = {
      {"bench", {{"seeds", 5}, {"wallclock", false}}},
      {"train", {{"epochs", 13}, {"reweight", {{"steps", 4}}}}},
      {"data",
       {{"kind", "files"}, {"nodes", "a.tsv"}, {"edges", "b.tsv"},
        {"per_class_train", 10},
        {"synthetic", {{"blocks", 5}, {"rho_train", 0.75}}}}},
      {"shift", {{"kind", "structural"}, {"edge_fraction", 0.4}, {"seed", 77}}},
  };
  apply_config(cfg, j);
  EXPECT_EQ(cfg.seeds, 5);
  EXPECT_FALSE(cfg.wallclock);
  EXPECT_EQ(cfg.threads, 1);  // untouched default
  EXPECT_EQ(cfg.train.epochs, 13);
  EXPECT_EQ(cfg.train.reweight.steps, 4);
  EXPECT_DOUBLE_EQ(cfg.train.learning_rate, default_lr);
  EXPECT_EQ(cfg.train.hidden, default_hidden);
  EXPECT_EQ(cfg.data.kind, DataSpec::Kind::Files);
  EXPECT_EQ(cfg.data.nodes_path, "a.tsv");
  EXPECT_EQ(cfg.data.edges_path, "b.tsv");
  EXPECT_EQ(cfg.data.per_class_train, 10);
  EXPECT_EQ(cfg.data.synthetic.blocks, 5);
  EXPECT_DOUBLE_EQ(cfg.data.synthetic.rho_train, 0.75);
  EXPECT_EQ(cfg.shift.kind, ShiftSpec::Kind::Structural);
  EXPECT_DOUBLE_EQ(cfg.shift.edge_fraction, 0.4);
  EXPECT_EQ(cfg.shift.seed, 77u);
}

TEST(ApplyConfig, RejectsUnknownEnumsAndWrongTypes) {
  ExperimentConfig cfg;
  EXPECT_THROW(apply_config(cfg, {{"shift", {{"kind", "weird"}}}}),
               ConfigError);
  EXPECT_THROW(apply_config(cfg, {{"data", {{"kind", "carrier-pigeon"}}}}),
               ConfigError);
  EXPECT_THROW(apply_config(cfg, {{"shift", {{"level", "huge"}}}}),
               ConfigError);
  EXPECT_THROW(apply_config(cfg, {{"train", {{"epochs", "ten"}}}}),
               ConfigError);
}

TEST(Snapshot, StableAndSchedulingFree) {
  ExperimentConfig a;
  ExperimentConfig b;
  b.threads = 16;  // scheduling, not semantics
  EXPECT_EQ(config_snapshot(a).dump(), config_snapshot(b).dump());
  EXPECT_EQ(config_snapshot(a).dump().find("threads"), std::string::npos);

  ExperimentConfig c;
  c.train.epochs += 1;
  EXPECT_NE(config_snapshot(a).dump(), config_snapshot(c).dump());
  ExperimentConfig d;
  d.wallclock = false;
  EXPECT_NE(config_snapshot(a).dump(), config_snapshot(d).dump());
}

TEST(Snapshot, CoversEverySection) {
  const auto j = config_snapshot(ExperimentConfig{});
  for (const char* key : {"train", "data", "shift", "bench"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_TRUE(j["train"].contains("reweight"));
  EXPECT_TRUE(j["data"].contains("synthetic"));
  EXPECT_TRUE(j["shift"].contains("synthetic"));
  EXPECT_TRUE(j["bench"].contains("seeds"));
  EXPECT_TRUE(j["bench"].contains("wallclock"));
}

TEST(FinalizeReport, StampsSnapshotAndItsHash) {
  ExperimentConfig cfg;
  cfg.train.epochs = 2;
  Report report;
  finalize_report(report, cfg);
  EXPECT_EQ(report.config, config_snapshot(cfg));
  EXPECT_EQ(report.config_hash, fnv1a_hex(report.config.dump()));
  EXPECT_EQ(report.config_hash.size(), 16u);

  Report again;
  finalize_report(again, cfg);
  EXPECT_EQ(report.config_hash, again.config_hash);
  cfg.train.epochs = 3;
  Report changed;
  finalize_report(changed, cfg);
  EXPECT_NE(report.config_hash, changed.config_hash);
}
