#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wrs/space.hpp"

namespace wrs {

/// Per-dimension probabilities of change p_i and minimum-sample counts k_i,
/// stored in search-space order.
class ChangeSchedule {
 public:
  /// Throws std::invalid_argument unless the lengths agree, every p_i lies
  /// in (0, 1], and the largest p_i is exactly 1.
  ChangeSchedule(std::vector<double> probs, std::vector<std::size_t> min_samples);

  /// The RS schedule: every dimension always changes.
  static ChangeSchedule all_ones(std::size_t d, std::size_t min_samples = 0);

  std::size_t size() const noexcept { return probs_.size(); }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const std::vector<std::size_t>& min_samples() const noexcept { return min_samples_; }

  friend bool operator==(const ChangeSchedule&, const ChangeSchedule&) = default;

 private:
  std::vector<double> probs_;
  std::vector<std::size_t> min_samples_;
};

/// Main-effect importance, in percent of total prediction variance.
struct WeightReport {
  std::vector<double> weights;
  std::size_t n_samples = 0;
  std::size_t n_trees = 0;
  std::size_t min_depth = 0;
  std::size_t max_depth = 0;
  double mean_leaves = 0.0;

  friend bool operator==(const WeightReport&, const WeightReport&) = default;
};

enum class Phase { rs, wrs };

const char* to_string(Phase p) noexcept;

struct TrialRecord {
  std::size_t iteration = 0;  // 1-based step index k
  Candidate candidate;
  std::optional<double> value;  // absent when the evaluation failed
  std::string error;
  std::vector<bool> changed;
  Phase phase = Phase::rs;
  double wall_seconds = 0.0;

  bool failed() const noexcept { return !value.has_value(); }
};

struct BestPoint {
  Candidate candidate;
  double value = 0.0;
  std::size_t iteration = 0;
};

/// Ordered trial ledger of one run plus the running best (maximization).
struct RunHistory {
  /// Throws std::invalid_argument unless 1 <= n_phase1 <= n_total.
  RunHistory(SearchSpace space, std::size_t n_total, std::size_t n_phase1);

  SearchSpace space;
  std::vector<TrialRecord> trials;
  std::optional<BestPoint> best;
  std::optional<ChangeSchedule> schedule;
  std::optional<WeightReport> weights;
  std::size_t n_total;
  std::size_t n_phase1;
  std::optional<std::string> warning;

  std::size_t next_iteration() const noexcept { return trials.size() + 1; }
};

}  // namespace wrs
