#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#ifndef FSMIRL_CLI_PATH
#error "FSMIRL_CLI_PATH must point at the cli binary"
#endif

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const auto out_path = dir / "stdout.txt";
  const auto err_path = dir / "stderr.txt";
  const std::string cmd = std::string(FSMIRL_CLI_PATH) + " " + args + " > " +
                          out_path.string() + " 2> " + err_path.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

fs::path fresh_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() /
                   ("fsmirl_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  return path.string();
}

const char* kTinyConfig = R"([bench]
seeds = 2

[train]
epochs = 2
batch_size = 16
hidden = 8
sample_size = 3
weight_update_period = 2

[train.reweight]
steps = 2
pairs_per_step = 2
holdout_pairs = 2

[data]
kind = "synthetic"

[data.synthetic]
blocks = 3
nodes_per_block = 20
feature_dim = 4
p_in = 0.3
p_out = 0.05

[shift]
kind = "structural"
edge_fraction = 0.5
)";

}  // namespace

TEST(Cli, RequiresASubcommand) {
  const auto dir = fresh_dir("noargs");
  const auto r = run_cli("", dir);
  EXPECT_NE(r.exit_code, 0);
  fs::remove_all(dir);
}

TEST(Cli, SynthWritesDatasetFiles) {
  const auto dir = fresh_dir("synth");
  const auto cfg = write_file(dir / "cfg.toml", kTinyConfig);
  const auto r =
      run_cli("--config " + cfg + " --out " + dir.string() + " synth", dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  for (const char* name : {"nodes.tsv", "edges.tsv", "split.tsv",
                           "variant_nodes.tsv", "variant_edges.tsv"})
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  fs::remove_all(dir);
}

TEST(Cli, TrainEvalFlowAndSeedDeterminism) {
  const auto dir = fresh_dir("flow");
  const auto cfg = write_file(dir / "cfg.toml", kTinyConfig);
  const auto a = dir / "a";
  const auto b = dir / "b";
  const auto c = dir / "c";
  fs::create_directories(a);
  fs::create_directories(b);
  fs::create_directories(c);

  const auto base = "--config " + cfg + " ";
  const auto ra =
      run_cli(base + "--seed 5 --out " + a.string() + " train", dir);
  ASSERT_EQ(ra.exit_code, 0) << ra.err;
  EXPECT_TRUE(fs::exists(a / "checkpoint.json"));
  EXPECT_TRUE(fs::exists(a / "history.csv"));
  EXPECT_NE(ra.out.find("acc"), std::string::npos) << ra.out;

  const auto rb =
      run_cli(base + "--seed 5 --out " + b.string() + " train", dir);
  ASSERT_EQ(rb.exit_code, 0) << rb.err;
  EXPECT_EQ(slurp(a / "checkpoint.json"), slurp(b / "checkpoint.json"));
  EXPECT_EQ(slurp(a / "history.csv"), slurp(b / "history.csv"));

  const auto rc =
      run_cli(base + "--seed 6 --out " + c.string() + " train", dir);
  ASSERT_EQ(rc.exit_code, 0) << rc.err;
  EXPECT_NE(slurp(a / "checkpoint.json"), slurp(c / "checkpoint.json"));

  const auto re = run_cli(base + "--seed 5 --out " + a.string() +
                              " eval --checkpoint " +
                              (a / "checkpoint.json").string() +
                              " --on original",
                          dir);
  ASSERT_EQ(re.exit_code, 0) << re.err;
  EXPECT_TRUE(fs::exists(a / "metrics.json"));

  const auto rv = run_cli(base + "--seed 5 --out " + a.string() +
                              " eval --checkpoint " +
                              (a / "checkpoint.json").string() +
                              " --on variant",
                          dir);
  ASSERT_EQ(rv.exit_code, 0) << rv.err;
  fs::remove_all(dir);
}

TEST(Cli, TrainCanDumpSamplingProfiles) {
  const auto dir = fresh_dir("profiles");
  const auto cfg = write_file(dir / "cfg.toml", kTinyConfig);
  const auto r = run_cli("--config " + cfg + " --out " + dir.string() +
                             " train --dump-profiles",
                         dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  ASSERT_TRUE(fs::exists(dir / "profiles.json"));
  const auto text = slurp(dir / "profiles.json");
  EXPECT_NE(text.find("\"branch\""), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, BenchReportsAreByteStableAcrossRunsAndThreads) {
  const auto dir = fresh_dir("bench");
  const auto cfg = write_file(dir / "cfg.toml", kTinyConfig);
  const auto a = dir / "a";
  const auto b = dir / "b";
  fs::create_directories(a);
  fs::create_directories(b);
  const auto ra = run_cli("--config " + cfg + " --no-wallclock --threads 1 " +
                              "--out " + a.string() + " bench",
                          dir);
  ASSERT_EQ(ra.exit_code, 0) << ra.err;
  const auto rb = run_cli("--config " + cfg + " --no-wallclock --threads 3 " +
                              "--out " + b.string() + " bench",
                          dir);
  ASSERT_EQ(rb.exit_code, 0) << rb.err;
  ASSERT_TRUE(fs::exists(a / "report.json"));
  ASSERT_TRUE(fs::exists(a / "report.csv"));
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  EXPECT_EQ(slurp(a / "report.csv"), slurp(b / "report.csv"));
  EXPECT_NE(slurp(a / "report.csv").find("condition,model,seed,acc"),
            std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, ReportVerbReprintsJsonAsCsv) {
  const auto dir = fresh_dir("report");
  const auto cfg = write_file(dir / "cfg.toml", kTinyConfig);
  const auto ra = run_cli("--config " + cfg + " --no-wallclock --out " +
                              dir.string() + " bench --reps 1",
                          dir);
  ASSERT_EQ(ra.exit_code, 0) << ra.err;
  const auto rc = run_cli("report --in " + (dir / "report.json").string() +
                              " --format csv",
                          dir);
  ASSERT_EQ(rc.exit_code, 0) << rc.err;
  EXPECT_EQ(rc.out, slurp(dir / "report.csv"));
  const auto rj = run_cli("report --in " + (dir / "report.json").string() +
                              " --format json",
                          dir);
  ASSERT_EQ(rj.exit_code, 0) << rj.err;
  EXPECT_EQ(rj.out, slurp(dir / "report.json"));
  fs::remove_all(dir);
}

TEST(Cli, ConvertBuildsTsvPairFromCitationCorpus) {
  const auto dir = fresh_dir("convert");
  const auto content = write_file(dir / "c.content",
                                  "p1\t1\t0\tA\n"
                                  "p2\t0\t1\tB\n"
                                  "p3\t1\t1\tA\n");
  const auto cites = write_file(dir / "c.cites",
                                "p1\tp2\n"
                                "p2\tp3\n"
                                "p1\tmissing\n");
  const auto r = run_cli("--out " + dir.string() + " convert --content " +
                             content + " --cites " + cites,
                         dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto nodes = slurp(dir / "nodes.tsv");
  const auto edges = slurp(dir / "edges.tsv");
  EXPECT_EQ(std::count(nodes.begin(), nodes.end(), '\n'), 4);  // header + 3
  EXPECT_EQ(std::count(edges.begin(), edges.end(), '\n'), 2);
  fs::remove_all(dir);
}

TEST(Cli, FailsCleanlyOnMissingInputs) {
  const auto dir = fresh_dir("badinput");
  const auto cfg = write_file(dir / "cfg.toml",
                              "[data]\nkind = \"files\"\n"
                              "nodes = \"/nonexistent/n.tsv\"\n"
                              "edges = \"/nonexistent/e.tsv\"\n");
  const auto r =
      run_cli("--config " + cfg + " --out " + dir.string() + " train", dir);
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.err.find("error:"), std::string::npos) << r.err;

  const auto rr = run_cli("report --in /nonexistent/report.json", dir);
  EXPECT_NE(rr.exit_code, 0);
  fs::remove_all(dir);
}
