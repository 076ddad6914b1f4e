#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wrs/history.hpp"
#include "wrs/importance.hpp"
#include "wrs/objectives.hpp"
#include "wrs/rng.hpp"
#include "wrs/space.hpp"

namespace wrs {

/// Floor applied to derived probabilities so every p_i stays in (0, 1].
inline constexpr double kProbabilityFloor = 1e-3;

struct StepOptions {
  /// Draw a separate uniform p per dimension instead of one shared draw per
  /// step. Off by default; the shared draw couples change events.
  bool independent_draws = false;
};

struct Proposal {
  Candidate candidate;
  std::vector<bool> changed;
};

/// Candidate generation of one WRS step at step index `iteration`.
///
/// Dimension i is resampled iff p_i >= p or iteration <= k_i, where p is
/// uniform on (0, 1) from `streams.gate`; otherwise it copies the best-so-far
/// coordinate. Without a best point every dimension is resampled.
Proposal propose_wrs(const SearchSpace& space, const ChangeSchedule& schedule,
                     const Candidate* best, std::size_t iteration, RunStreams& streams,
                     const StepOptions& options = {});

/// Candidate generation of one RS step: every coordinate resampled.
Proposal propose_rs(const SearchSpace& space, RunStreams& streams);

/// One WRS step on `history` (requires a schedule). Evaluates once, replaces
/// the best point when the new value is >= the best (ties replace), and
/// appends the record. Failed evaluations are recorded and never become best.
const TrialRecord& wrs_step(RunHistory& history, RunStreams& streams, const Objective& objective,
                            const StepOptions& options = {});

/// One RS step on `history`, with the same best-update rule.
const TrialRecord& rs_step(RunHistory& history, RunStreams& streams, const Objective& objective);

/// p_i = max(w_i / w_max, kProbabilityFloor), k_i = n_phase1. Throws
/// ImportanceError for all-zero, negative or non-finite weights.
ChangeSchedule derive_schedule(std::span<const double> weights, std::size_t n_phase1);
ChangeSchedule derive_schedule(const WeightReport& weights, std::size_t n_phase1);

/// round(N / e), kept within [1, N - 1]. Throws std::invalid_argument for N < 2.
std::size_t default_phase_split(std::size_t n_total);

struct RunSettings {
  std::size_t n_total = 0;
  std::optional<std::size_t> n_phase1;  // default_phase_split when absent
  std::optional<ChangeSchedule> schedule;  // skips importance estimation
  ForestSettings forest;
  StepOptions step;
};

/// Two-phase WRS: N_0 RS steps, importance estimation on those trials,
/// then N - N_0 WRS steps. When importance estimation fails the schedule
/// falls back to all ones and `history.warning` says why.
RunHistory run(const SearchSpace& space, const Objective& objective, const RunSettings& settings,
               RunStreams& streams);

/// Plain RS for `n_total` steps. The whole budget counts as phase 1.
RunHistory run_random_search(const SearchSpace& space, const Objective& objective,
                             std::size_t n_total, RunStreams& streams);

}  // namespace wrs
