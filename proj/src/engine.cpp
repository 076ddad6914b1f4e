#include "wrs/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wrs {

ChangeSchedule::ChangeSchedule(std::vector<double> probs, std::vector<std::size_t> min_samples)
    : probs_(std::move(probs)), min_samples_(std::move(min_samples)) {
  if (probs_.empty()) throw std::invalid_argument("schedule needs at least one dimension");
  if (probs_.size() != min_samples_.size())
    throw std::invalid_argument("schedule probabilities and minimum samples differ in length");
  for (double p : probs_)
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("probability of change " + std::to_string(p) +
                                  " is outside (0, 1]");
  if (*std::max_element(probs_.begin(), probs_.end()) != 1.0)
    throw std::invalid_argument("at least one probability of change must equal 1");
}

ChangeSchedule ChangeSchedule::all_ones(std::size_t d, std::size_t min_samples) {
  return ChangeSchedule(std::vector<double>(d, 1.0), std::vector<std::size_t>(d, min_samples));
}

const char* to_string(Phase p) noexcept { return p == Phase::rs ? "RS" : "WRS"; }

RunHistory::RunHistory(SearchSpace space_, std::size_t n_total_, std::size_t n_phase1_)
    : space(std::move(space_)), n_total(n_total_), n_phase1(n_phase1_) {
  if (n_phase1 < 1 || n_phase1 > n_total)
    throw std::invalid_argument("phase-1 length must lie in [1, n_total]");
  trials.reserve(n_total);
}

Proposal propose_rs(const SearchSpace& space, RunStreams& streams) {
  return Proposal{sample_candidate(space, streams.sampling), std::vector<bool>(space.size(), true)};
}

Proposal propose_wrs(const SearchSpace& space, const ChangeSchedule& schedule,
                     const Candidate* best, std::size_t iteration, RunStreams& streams,
                     const StepOptions& options) {
  const std::size_t d = space.size();
  if (schedule.size() != d) throw std::invalid_argument("schedule does not match the space");
  Proposal out;
  out.candidate.values.reserve(d);
  out.changed.assign(d, true);
  const double shared = options.independent_draws ? 0.0 : streams.gate.uniform_open01();
  for (std::size_t i = 0; i < d; ++i) {
    const double p = options.independent_draws ? streams.gate.uniform_open01() : shared;
    const bool resample = best == nullptr || schedule.probs()[i] >= p ||
                          iteration <= schedule.min_samples()[i];
    if (resample) {
      out.candidate.values.push_back(sample_dimension(space[i], streams.sampling));
    } else {
      out.candidate.values.push_back((*best)[i]);
      out.changed[i] = false;
    }
  }
  return out;
}

namespace {

const TrialRecord& evaluate_and_record(RunHistory& history, Proposal proposal, Phase phase,
                                       const Objective& objective) {
  if (history.trials.size() >= history.n_total)
    throw std::logic_error("run budget already spent");
  TrialRecord rec;
  rec.iteration = history.next_iteration();
  rec.phase = phase;
  rec.changed = std::move(proposal.changed);
  rec.candidate = std::move(proposal.candidate);

  const auto start = std::chrono::steady_clock::now();
  Evaluation e = objective.evaluate(history.space, rec.candidate);
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (e.ok() && std::isfinite(*e.value)) {
    rec.value = e.value;
    if (!history.best || *rec.value >= history.best->value)
      history.best = BestPoint{rec.candidate, *rec.value, rec.iteration};
  } else {
    rec.error = e.ok() ? "objective returned a non-finite value" : e.error;
    if (rec.error.empty()) rec.error = "evaluation failed";
  }
  history.trials.push_back(std::move(rec));
  return history.trials.back();
}

}  // namespace

const TrialRecord& wrs_step(RunHistory& history, RunStreams& streams, const Objective& objective,
                            const StepOptions& options) {
  if (!history.schedule) throw std::logic_error("WRS step needs a change schedule");
  const Candidate* best = history.best ? &history.best->candidate : nullptr;
  auto proposal = propose_wrs(history.space, *history.schedule, best, history.next_iteration(),
                              streams, options);
  return evaluate_and_record(history, std::move(proposal), Phase::wrs, objective);
}

const TrialRecord& rs_step(RunHistory& history, RunStreams& streams, const Objective& objective) {
  return evaluate_and_record(history, propose_rs(history.space, streams), Phase::rs, objective);
}

ChangeSchedule derive_schedule(std::span<const double> weights, std::size_t n_phase1) {
  if (weights.empty())
    throw ImportanceError(ImportanceError::Kind::invalid_weights, "no weights given");
  for (double w : weights)
    if (!std::isfinite(w) || w < 0.0)
      throw ImportanceError(ImportanceError::Kind::invalid_weights,
                            "weights must be finite and non-negative");
  const double w_max = *std::max_element(weights.begin(), weights.end());
  if (!(w_max > 0.0))
    throw ImportanceError(ImportanceError::Kind::invalid_weights,
                          "all weights are zero; falling back to random search");
  std::vector<double> probs(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    probs[i] = weights[i] == w_max ? 1.0 : std::max(weights[i] / w_max, kProbabilityFloor);
  return ChangeSchedule(std::move(probs), std::vector<std::size_t>(weights.size(), n_phase1));
}

ChangeSchedule derive_schedule(const WeightReport& weights, std::size_t n_phase1) {
  return derive_schedule(std::span<const double>(weights.weights), n_phase1);
}

std::size_t default_phase_split(std::size_t n_total) {
  if (n_total < 2) throw std::invalid_argument("a two-phase run needs at least 2 steps");
  const auto n0 =
      static_cast<std::size_t>(std::llround(static_cast<double>(n_total) / std::numbers::e));
  return std::clamp<std::size_t>(n0, 1, n_total - 1);
}

namespace {

void check_arity(const SearchSpace& space, const Objective& objective) {
  if (objective.arity() != 0 && objective.arity() != space.size())
    throw std::invalid_argument("objective '" + objective.name() + "' expects " +
                                std::to_string(objective.arity()) + " dimensions, space has " +
                                std::to_string(space.size()));
}

}  // namespace

RunHistory run(const SearchSpace& space, const Objective& objective, const RunSettings& settings,
               RunStreams& streams) {
  check_arity(space, objective);
  if (settings.n_total < 2) throw std::invalid_argument("a two-phase run needs at least 2 steps");
  const std::size_t n0 = settings.n_phase1.value_or(default_phase_split(settings.n_total));
  if (n0 < 1 || n0 >= settings.n_total)
    throw std::invalid_argument("phase-1 length must lie in [1, n_total - 1]");

  RunHistory history(space, settings.n_total, n0);
  for (std::size_t k = 1; k <= n0; ++k) rs_step(history, streams, objective);

  if (settings.schedule) {
    if (settings.schedule->size() != space.size())
      throw std::invalid_argument("schedule does not match the space");
    history.schedule = *settings.schedule;
  } else {
    try {
      const auto ensemble = fit_ensemble(history, settings.forest, streams.model);
      auto report = main_effect_weights(ensemble, space);
      history.schedule = derive_schedule(report, n0);
      history.weights = std::move(report);
    } catch (const ImportanceError& e) {
      history.schedule = ChangeSchedule::all_ones(space.size(), n0);
      history.warning = std::string("importance estimation failed (") + e.what() +
                        "); phase 2 runs as random search";
    }
  }

  for (std::size_t k = n0 + 1; k <= settings.n_total; ++k)
    wrs_step(history, streams, objective, settings.step);
  return history;
}

RunHistory run_random_search(const SearchSpace& space, const Objective& objective,
                             std::size_t n_total, RunStreams& streams) {
  check_arity(space, objective);
  if (n_total < 1) throw std::invalid_argument("random search needs at least 1 step");
  RunHistory history(space, n_total, n_total);
  for (std::size_t k = 1; k <= n_total; ++k) rs_step(history, streams, objective);
  return history;
}

}  // namespace wrs
