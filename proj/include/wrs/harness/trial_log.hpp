#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wrs/history.hpp"
#include "wrs/space.hpp"

namespace wrs::harness {

/// One line of a JSONL trial log. Field order on disk:
///   run, optimizer, iteration, phase, candidate, value, failed, [error],
///   changed, best, wall_time_s
/// `value` and `best` are null when absent. Only wall_time_s varies between
/// replays of the same seed.
struct TrialLogEntry {
  std::size_t run = 0;
  std::string optimizer;
  std::size_t iteration = 0;
  Phase phase = Phase::rs;
  std::vector<std::pair<std::string, Value>> candidate;
  std::optional<double> value;
  std::string error;
  std::vector<bool> changed;
  std::optional<double> best;
  double wall_time_s = 0.0;

  bool failed() const noexcept { return !value.has_value(); }

  friend bool operator==(const TrialLogEntry&, const TrialLogEntry&) = default;
};

/// Log entries of a finished run, with the running best recomputed in order.
std::vector<TrialLogEntry> log_entries(const RunHistory& history, std::size_t run,
                                       const std::string& optimizer);

/// Serializes one entry as a single JSON line (no trailing newline).
std::string format_log_line(const TrialLogEntry& entry);

/// Throws InputError on malformed lines.
TrialLogEntry parse_log_line(const std::string& line);

/// Writes entries, one per line. Throws IoError.
void write_trial_log(const std::filesystem::path& path, const std::vector<TrialLogEntry>& entries);

/// Reads a log; blank lines are skipped. Throws InputError when unreadable
/// or malformed.
std::vector<TrialLogEntry> read_trial_log(const std::filesystem::path& path);

/// The line with its wall_time_s field removed, for replay comparisons.
std::string strip_timing(const std::string& line);

}  // namespace wrs::harness
