// illumine: illumination search for testing learned systems.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "illumine/cli/commands.hpp"

namespace cli = illumine::cli;
namespace fs = std::filesystem;

namespace {

void add_run_options(CLI::App* cmd, cli::RunFlags& f, std::string& features, std::string& config) {
  cmd->add_option("config,--config", config, "JSON configuration file");
  cmd->add_option_function<std::string>("--domain", [&f](const std::string& v) { f.domain = v; }, "digit or road");
  cmd->add_option("--features", features, "comma-separated feature metrics, e.g. Mov,Lum");
  cmd->add_option_function<std::uint64_t>("--seed", [&f](std::uint64_t v) { f.seed = v; }, "RNG seed");
  cmd->add_option_function<std::string>("--budget", [&f](const std::string& v) { f.budget = v; },
                                        "loop evaluations (N) or wall-clock seconds (Ns)");
  cmd->add_option_function<std::string>("--out", [&f](const std::string& v) { f.out = v; }, "archive directory");
  cmd->add_option_function<std::size_t>("--workers", [&f](std::size_t v) { f.workers = v; },
                                        "parallel evaluations (1 is deterministic across machines)");
  cmd->add_option_function<std::string>("--model", [&f](const std::string& v) { f.model = v; },
                                        "trained classifier for the built-in digit SUT");
  cmd->add_option_function<std::string>("--mnist", [&f](const std::string& v) { f.mnist_dir = v; },
                                        "MNIST directory (default $ILLUMINE_MNIST_DIR)");
  cmd->add_option_function<std::string>("--sut", [&f](const std::string& v) { f.sut_command = v; },
                                        "external SUT command speaking the line-JSON protocol");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Illumination search over digit and road inputs"};
  app.set_version_flag("--version", cli::kToolVersion);
  app.require_subcommand(1);

  cli::RunFlags run_flags, baseline_flags;
  std::string run_features, run_config, baseline_features, baseline_config;
  auto* run = app.add_subcommand("run", "MAP-Elites illumination search");
  add_run_options(run, run_flags, run_features, run_config);
  auto* baseline = app.add_subcommand("baseline", "random-search control: mutate random seeds");
  add_run_options(baseline, baseline_flags, baseline_features, baseline_config);

  cli::AnalyzeOptions analyze_opt;
  std::vector<std::string> analyze_dirs;
  auto* analyze = app.add_subcommand("analyze", "rescaled maps, metrics, CSV and SVG reports");
  analyze->add_option("archives", analyze_dirs, "run archives")->required();
  analyze->add_option("--grid", analyze_opt.grid, "cells per feature after rescaling")->capture_default_str();
  analyze->add_option("--z", analyze_opt.z, "Wilson interval z")->capture_default_str();
  analyze->add_option("--out", analyze_opt.out, "report directory")->capture_default_str();

  cli::CompareOptions compare_opt;
  std::vector<std::string> group_a, group_b;
  auto* compare = app.add_subcommand("compare", "Mann-Whitney U and A12 between two groups of runs");
  compare->add_option("--a", group_a, "archives of group A")->required();
  compare->add_option("--b", group_b, "archives of group B")->required();
  compare->add_option("--grid", compare_opt.grid, "cells per feature after rescaling")->capture_default_str();
  compare->add_option("--out", compare_opt.out, "JSON report file");

  cli::TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "train the built-in digit classifier");
  train->add_option_function<std::string>("--mnist", [&](const std::string& v) { train_flags.mnist_dir = v; },
                                          "MNIST directory (default $ILLUMINE_MNIST_DIR)");
  train->add_option("--out", train_flags.out, "model file")->capture_default_str();
  train->add_option("--epochs", train_flags.train.epochs)->capture_default_str();
  train->add_option("--lr", train_flags.train.learning_rate)->capture_default_str();
  train->add_option("--batch", train_flags.train.batch_size)->capture_default_str();
  train->add_option("--hidden", train_flags.train.hidden)->capture_default_str();
  train->add_option("--seed", train_flags.train.seed)->capture_default_str();

  cli::CorrelateOptions correlate_opt;
  std::string labels, metrics;
  auto* correlate = app.add_subcommand("correlate", "Pearson r and permutation p of metrics against labels");
  correlate->add_option("labels", labels, "CSV: id, label columns")->required();
  correlate->add_option("metrics", metrics, "CSV: id, metric columns")->required();
  correlate->add_option("--out", correlate_opt.out, "CSV output file");
  correlate->add_option("--resamples", correlate_opt.resamples)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(cli::kUsage);
  }

  auto finish_run_flags = [](cli::RunFlags& f, const std::string& features, const std::string& config) {
    if (!features.empty()) f.features = cli::split_list(features);
    if (!config.empty()) f.config_file = config;
  };
  if (*run) {
    finish_run_flags(run_flags, run_features, run_config);
    return cli::cmd_run(run_flags, illumine::SearchMode::Illumination);
  }
  if (*baseline) {
    finish_run_flags(baseline_flags, baseline_features, baseline_config);
    return cli::cmd_run(baseline_flags, illumine::SearchMode::Baseline);
  }
  if (*analyze) {
    analyze_opt.archives.assign(analyze_dirs.begin(), analyze_dirs.end());
    return cli::cmd_analyze(analyze_opt);
  }
  if (*compare) {
    compare_opt.group_a.assign(group_a.begin(), group_a.end());
    compare_opt.group_b.assign(group_b.begin(), group_b.end());
    return cli::cmd_compare(compare_opt);
  }
  if (*train) return cli::cmd_train(train_flags);
  if (*correlate) {
    correlate_opt.labels = labels;
    correlate_opt.metrics = metrics;
    return cli::cmd_correlate(correlate_opt);
  }
  return static_cast<int>(cli::kUsage);
}
