#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wrs/harness/trial_log.hpp"
#include "wrs/importance.hpp"
#include "wrs/space.hpp"

namespace wrs::harness {

/// Space implied by the logged candidates: all strings give a categorical
/// set, all integers an integer range, anything else a real interval over
/// the observed extremes. Throws InputError on inconsistent entries.
SearchSpace infer_space(const std::vector<TrialLogEntry>& entries);

/// Candidate of `entry` in `space` order; integers widen to reals where the
/// space asks for one. Throws InputError when a value is missing or outside
/// the space.
Candidate candidate_in(const SearchSpace& space, const TrialLogEntry& entry);

struct ImportanceOptions {
  std::optional<SearchSpace> space;  // inferred from the log when absent
  bool all_phases = false;           // default: RS-phase entries only
  ForestSettings forest;
  std::uint64_t seed = 0;
};

/// Weight table in three CSV rows:
///   Parameter,<name>,...
///   Weight,<percent>,...
///   Probability,<p_i>,...
/// InputError (exit 2) for fewer than the minimum successful trials,
/// DegenerateDataError (exit 4) for a constant objective or model.
std::string importance_table(const std::vector<TrialLogEntry>& entries,
                             const ImportanceOptions& options);

/// importance_table over a log file.
std::string importance_from_log(const std::filesystem::path& log, const ImportanceOptions& options);

struct TheoryRequest {
  std::vector<std::string> cards;  // decimal counts; "inf" marks a real interval
  std::vector<double> probs;
  std::vector<std::uint64_t> distinct;
  std::uint64_t n_min = 1;
  std::uint64_t n_max = 1;
};

/// CSV `n,p_rs,p_wrs,p_rs_n,p_wrs_n`, one row per n in [n_min, n_max].
/// InputError for infinite cardinalities, n_min == 0, n_min > n_max or an
/// invalid profile.
std::string theory_csv(const TheoryRequest& request);

struct BenchRequest {
  std::string builtin;
  std::size_t dims = 0;  // 0: the builtin's own arity (6 for the modified form)
  std::vector<std::vector<double>> points;
  std::size_t samples = 0;  // uniform draws over [low, high]^d
  double low = -600.0;
  double high = 600.0;
  std::uint64_t seed = 0;
};

/// CSV `x1..xd,f,objective`: the raw benchmark value and the maximized
/// objective (its negation) per point, explicit points first.
std::string bench_csv(const BenchRequest& request);

}  // namespace wrs::harness
