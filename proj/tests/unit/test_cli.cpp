#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <sys/wait.h>

#include "illumine/cli/commands.hpp"
#include "support.hpp"

using namespace illumine;
using namespace illumine::cli;
using nlohmann::json;

namespace {

RunFlags road_flags(const fs::path& out, std::uint64_t seed = 1, const std::string& budget = "60") {
  RunFlags f;
  f.domain = "road";
  f.features = std::vector<std::string>{"MLP", "StdSA"};
  f.seed = seed;
  f.budget = budget;
  f.out = out;
  return f;
}

int run_quiet(const RunFlags& f, SearchMode mode = SearchMode::Illumination) {
  std::ostringstream out, err;
  const int code = cmd_run(f, mode, out, err);
  if (code != kOk) std::cerr << err.str();
  return code;
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cli_binary() { return ILLUMINE_CLI; }

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = support::slurp(e.path());
  return files;
}

} // namespace

TEST(CmdRun, RoadRunWritesAnArchive) {
  support::TempDir tmp("cli-run");
  ASSERT_EQ(run_quiet(road_flags(tmp / "r1")), kOk);
  for (const char* f : {"config.json", "map.json", "evaluations.jsonl", "manifest.json"})
    EXPECT_TRUE(fs::exists(tmp / "r1" / f)) << f;
  const json manifest = json::parse(support::slurp(tmp / "r1" / "manifest.json"));
  EXPECT_EQ(manifest["status"], "ok");
  EXPECT_EQ(manifest["command"], "run");
  EXPECT_EQ(manifest["stats"]["loop_evaluations"], 60);
  const LoadedArchive a = load_archive(tmp / "r1");
  EXPECT_EQ(a.domain(), "road");
  EXPECT_EQ(a.features(), (std::vector<std::string>{"MLP", "StdSA"}));
  EXPECT_EQ(a.log.size(), manifest["stats"]["logged"].get<std::size_t>());
  EXPECT_EQ(a.log.size(), 24u + 60u - manifest["stats"]["discarded"].get<std::size_t>());
}

TEST(CmdRun, BaselineRecordsItsMode) {
  support::TempDir tmp("cli-baseline");
  ASSERT_EQ(run_quiet(road_flags(tmp / "b"), SearchMode::Baseline), kOk);
  const json manifest = json::parse(support::slurp(tmp / "b" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "baseline");
  EXPECT_EQ(manifest["config"]["mode"], "baseline");
}

TEST(CmdRun, ZeroBudgetMapsOnlyThePopulation) {
  support::TempDir tmp("cli-zero");
  ASSERT_EQ(run_quiet(road_flags(tmp / "z", 3, "0")), kOk);
  EXPECT_EQ(load_archive(tmp / "z").log.size(), 24u);
}

TEST(CmdRun, SameSeedSameArchive) {
  support::TempDir tmp("cli-determinism");
  ASSERT_EQ(run_quiet(road_flags(tmp / "a", 9)), kOk);
  ASSERT_EQ(run_quiet(road_flags(tmp / "b", 9)), kOk);
  EXPECT_EQ(support::slurp(tmp / "a" / "evaluations.jsonl"), support::slurp(tmp / "b" / "evaluations.jsonl"));
  EXPECT_EQ(support::slurp(tmp / "a" / "map.json"), support::slurp(tmp / "b" / "map.json"));
}

TEST(CmdRun, UnknownFeatureIsAUsageError) {
  support::TempDir tmp("cli-feature");
  RunFlags f = road_flags(tmp / "x");
  f.features = std::vector<std::string>{"MLP", "AvgAng"};
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(f, SearchMode::Illumination, out, err), kUsage);
  EXPECT_NE(err.str().find("valid metrics: MinRad"), std::string::npos) << err.str();
}

TEST(CmdRun, ConfigFileAndFlagPrecedence) {
  support::TempDir tmp("cli-config");
  const json cfg = {{"domain", "road"},     {"features", {"TurCnt", "MinRad"}}, {"seed", 4},
                    {"budget", 10},         {"seed_pool_size", 30},             {"population_size", 12},
                    {"out", (tmp / "from-file").string()}};
  write_text(tmp / "cfg.json", cfg.dump());
  RunFlags f;
  f.config_file = tmp / "cfg.json";
  f.budget = "5";
  ASSERT_EQ(run_quiet(f), kOk);
  const json snap = json::parse(support::slurp(tmp / "from-file" / "config.json"));
  EXPECT_EQ(snap["features"], json({"TurCnt", "MinRad"}));
  EXPECT_EQ(snap["budget"]["evaluations"], 5);
  EXPECT_EQ(snap["population_size"], 12);
  const json manifest = json::parse(support::slurp(tmp / "from-file" / "manifest.json"));
  EXPECT_EQ(load_archive(tmp / "from-file").log.size(), 12u + 5u - manifest["stats"]["discarded"].get<std::size_t>());

  write_text(tmp / "bad.json", "{\"domain\": ");
  f.config_file = tmp / "bad.json";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(f, SearchMode::Illumination, out, err), kUsage);
}

TEST(CmdRun, BadBudgetIsAUsageError) {
  support::TempDir tmp("cli-budget");
  for (const char* b : {"-3", "ten", "1.5", "s"}) {
    std::ostringstream out, err;
    EXPECT_EQ(cmd_run(road_flags(tmp / "x", 1, b), SearchMode::Illumination, out, err), kUsage) << b;
  }
}

TEST(CmdRun, MissingModelIsAnEnvironmentError) {
  const auto dir = support::mnist_dir();
  if (dir.empty() || !digit::mnist_available(dir)) GTEST_SKIP() << "MNIST not available";
  support::TempDir tmp("cli-model");
  RunFlags f;
  f.domain = "digit";
  f.budget = "10";
  f.out = tmp / "d";
  f.mnist_dir = dir;
  f.model = tmp / "missing-model.json";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(f, SearchMode::Illumination, out, err), kEnvironment);
}

TEST(CmdRun, MissingMnistIsAnEnvironmentError) {
  support::TempDir tmp("cli-mnist");
  RunFlags f;
  f.domain = "digit";
  f.budget = "10";
  f.out = tmp / "d";
  f.mnist_dir = tmp / "nowhere";
  f.sut_command = support::stub_sut() + " uniform";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(f, SearchMode::Illumination, out, err), kEnvironment);
}

TEST(CmdRun, DigitRunWithTheStubSut) {
  const auto dir = support::mnist_dir();
  if (dir.empty() || !digit::mnist_available(dir)) GTEST_SKIP() << "MNIST not available";
  support::TempDir tmp("cli-digit");
  const json cfg = {{"domain", "digit"}, {"seed_pool_size", 40}, {"population_size", 20}, {"budget", 30}};
  write_text(tmp / "cfg.json", cfg.dump());
  RunFlags f;
  f.config_file = tmp / "cfg.json";
  f.out = tmp / "d";
  f.mnist_dir = dir;
  f.sut_command = support::stub_sut() + " uniform";
  ASSERT_EQ(run_quiet(f), kOk);
  const LoadedArchive a = load_archive(tmp / "d");
  EXPECT_EQ(a.log.size(), 50u);
  for (const auto& r : a.log) EXPECT_EQ(r.fitness, 0.0);
  EXPECT_TRUE(fs::exists(tmp / "d" / "inputs" / "0.bin"));
}

TEST(CmdRun, UnlaunchableExternalSutIsAnEnvironmentError) {
  support::TempDir tmp("cli-external");
  RunFlags f = road_flags(tmp / "x");
  f.sut_command = "/nonexistent/illumine-sut";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(f, SearchMode::Illumination, out, err), kEnvironment);
  f.sut_command = support::stub_sut() + " garbage";
  EXPECT_EQ(cmd_run(f, SearchMode::Illumination, out, err), kEnvironment);
}

TEST(CmdAnalyze, ReportsAndIdempotence) {
  support::TempDir tmp("cli-analyze");
  ASSERT_EQ(run_quiet(road_flags(tmp / "r1", 1)), kOk);
  ASSERT_EQ(run_quiet(road_flags(tmp / "r2", 2)), kOk);
  AnalyzeOptions opt;
  opt.archives = {tmp / "r1", tmp / "r2"};
  opt.grid = 10;
  opt.out = tmp / "analysis";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_analyze(opt, out, err), kOk) << err.str();
  for (const char* f : {"summary.json", "r1_cells.csv", "r2_cells.csv", "combined_cells.csv", "r1_MLP_StdSA_mp.svg",
                        "r1_MLP_StdSA_fitness.svg", "r1_MLP_StdSA_evals.svg", "r1_MLP_StdSA_gallery.svg",
                        "combined_MLP_StdSA_mp.svg"})
    EXPECT_TRUE(fs::exists(opt.out / f)) << f;
  const json summary = json::parse(support::slurp(opt.out / "summary.json"));
  EXPECT_EQ(summary["runs"].size(), 2u);
  EXPECT_LE(summary["runs"][0]["MM"].get<int>(), summary["runs"][0]["FC"].get<int>());

  const auto first = tree(opt.out);
  ASSERT_EQ(cmd_analyze(opt, out, err), kOk);
  EXPECT_EQ(tree(opt.out), first);
}

TEST(CmdAnalyze, MixedFeaturesIsAUsageError) {
  support::TempDir tmp("cli-mixed");
  ASSERT_EQ(run_quiet(road_flags(tmp / "r1")), kOk);
  RunFlags f = road_flags(tmp / "r2");
  f.features = std::vector<std::string>{"MinRad", "DirCov"};
  ASSERT_EQ(run_quiet(f), kOk);
  AnalyzeOptions opt;
  opt.archives = {tmp / "r1", tmp / "r2"};
  opt.out = tmp / "analysis";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_analyze(opt, out, err), kUsage);
  opt.archives = {tmp / "missing"};
  EXPECT_EQ(cmd_analyze(opt, out, err), kUsage);
}

TEST(CmdCompare, IdenticalGroupsGiveNoEffect) {
  support::TempDir tmp("cli-compare");
  ASSERT_EQ(run_quiet(road_flags(tmp / "a1", 1)), kOk);
  ASSERT_EQ(run_quiet(road_flags(tmp / "a2", 2)), kOk);
  fs::copy(tmp / "a1", tmp / "b1", fs::copy_options::recursive);
  fs::copy(tmp / "a2", tmp / "b2", fs::copy_options::recursive);
  CompareOptions opt;
  opt.group_a = {tmp / "a1", tmp / "a2"};
  opt.group_b = {tmp / "b1", tmp / "b2"};
  opt.out = tmp / "cmp.json";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_compare(opt, out, err), kOk) << err.str();
  const json report = json::parse(support::slurp(opt.out));
  for (const char* m : {"MM", "MS", "FC", "CS"}) {
    EXPECT_DOUBLE_EQ(report[m]["A12"].get<double>(), 0.5) << m;
    EXPECT_DOUBLE_EQ(report[m]["p"].get<double>(), 1.0) << m;
  }
  EXPECT_EQ(report["group_b_runs"], json({"b1", "b2"}));
}

TEST(CmdCorrelate, LinearColumnsHitThePermutationFloor) {
  support::TempDir tmp("cli-correlate");
  write_text(tmp / "labels.csv", "id,Boldness\na,1\nb,2\nc,3\nd,4\ne,5\nf,6\nx,9\n");
  write_text(tmp / "metrics.csv", "id,Lum,Flat\nf,13,1\ne,11,1\nd,9,1\nc,7,1\nb,5,1\na,3,1\n");
  CorrelateOptions opt{tmp / "labels.csv", tmp / "metrics.csv", tmp / "out.csv"};
  std::ostringstream out, err;
  ASSERT_EQ(cmd_correlate(opt, out, err), kOk) << err.str();
  EXPECT_EQ(support::slurp(tmp / "out.csv"), "label,metric,n,r,p\nBoldness,Lum,6,1,0.002\nBoldness,Flat,6,,\n");
  EXPECT_NE(err.str().find("zero variance"), std::string::npos);

  write_text(tmp / "bad.csv", "id,Lum\na,one\n");
  opt.metrics = tmp / "bad.csv";
  EXPECT_EQ(cmd_correlate(opt, out, err), kUsage);
}

TEST(CmdTrain, MissingMnistIsAnEnvironmentError) {
  support::TempDir tmp("cli-train");
  TrainFlags f;
  f.mnist_dir = tmp / "nowhere";
  f.out = tmp / "m.json";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_train(f, out, err), kEnvironment);
}

TEST(Executable, ExitCodes) {
  const std::string cli = cli_binary();
  EXPECT_EQ(shell(cli + " --version"), 0);
  EXPECT_EQ(shell(cli), 2);
  EXPECT_EQ(shell(cli + " run --domain boat"), 2);
  EXPECT_EQ(shell(cli + " analyze"), 2);
  EXPECT_EQ(shell(cli + " frobnicate"), 2);
}
