// Command-line front end: run / compare campaigns, importance tables,
// convergence-probability curves and benchmark spot checks.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wrs/harness/campaign.hpp"
#include "wrs/harness/commands.hpp"
#include "wrs/harness/config.hpp"
#include "wrs/harness/errors.hpp"

namespace {

using namespace wrs::harness;

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("'" + item + "' is not a number");
    }
  }
  return out;
}

int campaign(const std::string& path, bool compare, bool quiet) {
  ExperimentConfig config = load_config(path);
  apply_environment(config);
  if (compare) config.optimizers = {kOptimizerRs, kOptimizerWrs};

  auto report = [quiet](const RunOutcome& r) {
    if (quiet) return;
    std::fprintf(stderr, "%s run %zu: best %s%s\n", r.optimizer.c_str(), r.run,
                 r.best ? std::to_string(*r.best).c_str() : "none",
                 r.warning ? " (importance fallback)" : "");
  };
  const auto result = run_campaign(config, report);

  for (const auto& s : result.summaries) {
    if (s.summary)
      std::printf("%-4s best %.6g  mean %.6g  sd %.6g  runs %zu\n", s.optimizer.c_str(),
                  s.summary->best, s.summary->mean, s.summary->sd, s.summary->n_runs);
    else
      std::printf("%-4s no successful runs\n", s.optimizer.c_str());
  }
  if (result.t_test)
    std::printf("t %.6g  df %.0f  se %.6g  p %.6g\n", result.t_test->t, result.t_test->df,
                result.t_test->standard_error, result.t_test->p_value);
  std::printf("output: %s\n", result.output_dir.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted random search: campaigns, importance and theory tools"};
  app.require_subcommand(1);

  std::string config_path;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "Run the optimizers listed in a config");
  run_cmd->add_option("config", config_path, "Campaign config (JSON)")->required();
  run_cmd->add_flag("-q,--quiet", quiet, "No per-run progress on stderr");

  auto* compare_cmd = app.add_subcommand("compare", "Run RS and WRS on the same config");
  compare_cmd->add_option("config", config_path, "Campaign config (JSON)")->required();
  compare_cmd->add_flag("-q,--quiet", quiet, "No per-run progress on stderr");

  std::string log_path;
  std::string space_config;
  bool all_phases = false;
  std::uint64_t importance_seed = 0;
  std::size_t trees = 32;
  std::size_t min_leaf = 2;
  auto* imp_cmd = app.add_subcommand("importance", "Weight table from a trial log");
  imp_cmd->add_option("log", log_path, "Trial log (JSONL)")->required();
  imp_cmd->add_option("--config", space_config, "Config whose space declaration to use");
  imp_cmd->add_flag("--all-phases", all_phases, "Fit on every trial, not only the RS phase");
  imp_cmd->add_option("--seed", importance_seed, "Seed of the tree ensemble");
  imp_cmd->add_option("--trees", trees, "Number of trees")->check(CLI::PositiveNumber);
  imp_cmd->add_option("--min-leaf", min_leaf, "Minimum samples per leaf")->check(CLI::PositiveNumber);

  TheoryRequest theory;
  auto* theory_cmd = app.add_subcommand("theory", "Per-step and n-step optimum-hit probabilities");
  theory_cmd->add_option("--cards", theory.cards, "Cardinalities |S_i| (\"inf\" for a real interval)")
      ->required()
      ->delimiter(',');
  theory_cmd->add_option("--probs", theory.probs, "Probabilities of change p_i")->required()->delimiter(',');
  theory_cmd->add_option("--distinct", theory.distinct, "Distinct-value counts m_i")
      ->required()
      ->delimiter(',');
  theory_cmd->add_option("--n-min", theory.n_min, "First n");
  theory_cmd->add_option("--n-max", theory.n_max, "Last n");

  BenchRequest bench;
  std::vector<std::string> points;
  auto* bench_cmd = app.add_subcommand("bench", "Evaluate a built-in benchmark");
  bench_cmd->add_option("builtin", bench.builtin, "griewank | griewank_modified_6")->required();
  bench_cmd->add_option("-d,--dims", bench.dims, "Dimension count (griewank)");
  bench_cmd->add_option("-p,--point", points, "Comma-separated coordinates; repeatable");
  bench_cmd->add_option("-n,--samples", bench.samples, "Uniform random points to add");
  bench_cmd->add_option("--low", bench.low, "Sampling lower bound");
  bench_cmd->add_option("--high", bench.high, "Sampling upper bound");
  bench_cmd->add_option("--seed", bench.seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*run_cmd) return campaign(config_path, false, quiet);
    if (*compare_cmd) return campaign(config_path, true, quiet);
    if (*imp_cmd) {
      ImportanceOptions options;
      options.all_phases = all_phases;
      options.seed = importance_seed;
      options.forest.n_trees = trees;
      options.forest.min_samples_leaf = min_leaf;
      if (!space_config.empty()) options.space = load_config(space_config).space();
      std::cout << importance_from_log(log_path, options);
      return kExitOk;
    }
    if (*theory_cmd) {
      if (theory_cmd->count("--n-max") == 0) theory.n_max = theory.n_min;
      std::cout << theory_csv(theory);
      return kExitOk;
    }
    if (*bench_cmd) {
      for (const auto& p : points) bench.points.push_back(parse_point(p));
      if (bench.points.empty() && bench.samples == 0)
        bench.points.emplace_back(bench.dims == 0 ? 6 : bench.dims, 0.0);
      std::cout << bench_csv(bench);
      return kExitOk;
    }
  } catch (const HarnessError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
