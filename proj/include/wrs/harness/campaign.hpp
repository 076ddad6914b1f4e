#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wrs/harness/config.hpp"
#include "wrs/history.hpp"
#include "wrs/objectives.hpp"
#include "wrs/stats.hpp"

namespace wrs::harness {

/// What the reduce step keeps of one finished run.
struct RunOutcome {
  std::string optimizer;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::optional<double> best;
  std::vector<std::optional<double>> curve;  // best-so-far after each trial
  std::size_t failed_trials = 0;
  std::size_t n_phase1 = 0;
  std::optional<ChangeSchedule> schedule;
  std::optional<WeightReport> weights;
  std::optional<std::string> warning;
};

struct OptimizerSummary {
  std::string optimizer;
  /// Absent when no run of the optimizer produced a successful trial.
  std::optional<stats::CampaignSummary> summary;
};

struct CampaignResult {
  std::filesystem::path output_dir;
  std::vector<RunOutcome> runs;  // grouped by optimizer, then run index
  std::vector<OptimizerSummary> summaries;
  /// WRS (sample a) against RS (sample b); present when both ran with
  /// at least two successful runs each.
  std::optional<stats::TTestResult> t_test;
  std::vector<std::filesystem::path> log_files;
};

/// Executes run `run_index` of `optimizer` with its derived seed.
RunHistory execute_run(const ExperimentConfig& config, const SearchSpace& space,
                       const Objective& objective, const std::string& optimizer,
                       std::size_t run_index);

/// Log file of one run, relative to the output directory.
std::filesystem::path log_path(const std::string& optimizer, std::size_t run_index);

/// Runs every (optimizer, run) pair on a bounded worker pool and writes
///   config.resolved.json
///   logs/<OPT>_run<NNNN>.jsonl
///   summary.csv            optimizer,best,mean,sd,n_runs,t,df,se,p_value
///   convergence_<OPT>.csv  iteration,run_0,...,mean
///   schedules.csv          one row per WRS run
/// into config.output_dir. Throws IoError when the directory is unwritable.
/// `progress`, when set, is called once per finished run from a worker
/// thread, serialized.
CampaignResult run_campaign(const ExperimentConfig& config,
                            const std::function<void(const RunOutcome&)>& progress = {});

/// Per-run best values recomputed from the logs of `result.output_dir`.
std::map<std::string, std::vector<double>> bests_from_logs(const std::filesystem::path& output_dir,
                                                           const ExperimentConfig& config);

}  // namespace wrs::harness
