#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wrs/history.hpp"
#include "wrs/importance.hpp"
#include "wrs/objectives.hpp"
#include "wrs/space.hpp"

namespace wrs::harness {

inline constexpr const char* kOptimizerRs = "RS";
inline constexpr const char* kOptimizerWrs = "WRS";

/// Environment variable that overrides `output_dir`.
inline constexpr const char* kOutputDirEnv = "WRS_OUTPUT_DIR";

struct ObjectiveSpec {
  std::string builtin;  // empty when `command` is set
  std::optional<CommandSpec> command;
};

struct ScheduleOverride {
  std::vector<double> probs;
  std::optional<std::vector<std::size_t>> min_samples;  // default: N_0 for all
};

/// One campaign, as read from a JSON config file.
///
///   {
///     "space": [{"name": "x1", "type": "real", "low": -600, "high": 600},
///               {"name": "layers", "type": "categorical", "values": [3, 4, 5, 6]},
///               {"name": "filters", "type": "integer", "low": 100, "high": 1024}],
///     "objective": {"builtin": "griewank_modified_6"},
///     "n_total": 1000,
///     "n_phase1": "auto",
///     "schedule": "auto",
///     "change_draws": "shared",
///     "n_runs": 200,
///     "base_seed": 2024,
///     "optimizers": ["RS", "WRS"],
///     "parallelism": "auto",
///     "output_dir": "results",
///     "importance": {"trees": 32, "min_samples_leaf": 2, "max_depth": 0, "bootstrap": true}
///   }
///
/// An external objective replaces "builtin" with
///   {"command": ["python3", "train.py"], "timeout_s": 3600, "persistent": false,
///    "max_parallel": 1}.
struct ExperimentConfig {
  std::vector<Dimension> dimensions;
  ObjectiveSpec objective;
  std::size_t n_total = 0;
  std::optional<std::size_t> n_phase1;
  std::optional<ScheduleOverride> schedule;
  bool independent_draws = false;
  std::size_t n_runs = 1;
  std::uint64_t base_seed = 0;
  std::vector<std::string> optimizers{kOptimizerWrs};
  std::size_t parallelism = 0;  // 0: hardware threads
  std::filesystem::path output_dir = "wrs_output";
  ForestSettings importance;

  SearchSpace space() const { return SearchSpace(dimensions); }
};

/// Throws ConfigError describing the first problem found.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Reads and parses a config file; ConfigError when unreadable or invalid.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config, with defaults made explicit.
nlohmann::ordered_json to_json(const ExperimentConfig& config);

/// Applies kOutputDirEnv when set.
void apply_environment(ExperimentConfig& config);

/// Builds the configured objective and checks its arity against the space.
std::shared_ptr<Objective> make_objective(const ExperimentConfig& config);

/// Seed of run `run_index` of `optimizer`: two derive_seed levels under the
/// base seed, keyed by the optimizer name's FNV-1a hash and the run index.
std::uint64_t run_seed(std::uint64_t base_seed, const std::string& optimizer,
                       std::size_t run_index);

/// Parses one dimension declaration.
Dimension parse_dimension(const nlohmann::json& j);
nlohmann::ordered_json dimension_to_json(const Dimension& dim);

}  // namespace wrs::harness
