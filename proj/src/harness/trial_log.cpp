#include "wrs/harness/trial_log.hpp"

#include <fstream>

#include "harness/json_util.hpp"
#include "json.hpp"
#include "wrs/harness/errors.hpp"

namespace wrs::harness {

using ojson = nlohmann::ordered_json;

std::vector<TrialLogEntry> log_entries(const RunHistory& history, std::size_t run,
                                       const std::string& optimizer) {
  std::vector<TrialLogEntry> out;
  out.reserve(history.trials.size());
  std::optional<double> best;
  for (const auto& t : history.trials) {
    TrialLogEntry e;
    e.run = run;
    e.optimizer = optimizer;
    e.iteration = t.iteration;
    e.phase = t.phase;
    for (std::size_t i = 0; i < t.candidate.size(); ++i)
      e.candidate.emplace_back(history.space[i].name(), t.candidate[i]);
    e.value = t.value;
    e.error = t.error;
    e.changed = t.changed;
    if (t.value && (!best || *t.value >= *best)) best = t.value;
    e.best = best;
    e.wall_time_s = t.wall_seconds;
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_log_line(const TrialLogEntry& e) {
  ojson j;
  j["run"] = e.run;
  j["optimizer"] = e.optimizer;
  j["iteration"] = e.iteration;
  j["phase"] = to_string(e.phase);
  ojson cand = ojson::object();
  for (const auto& [name, v] : e.candidate) cand[name] = detail::value_to_json<ojson>(v);
  j["candidate"] = std::move(cand);
  j["value"] = e.value ? ojson(*e.value) : ojson(nullptr);
  j["failed"] = e.failed();
  if (e.failed()) j["error"] = e.error;
  ojson changed = ojson::array();
  for (bool c : e.changed) changed.push_back(c);
  j["changed"] = std::move(changed);
  j["best"] = e.best ? ojson(*e.best) : ojson(nullptr);
  j["wall_time_s"] = e.wall_time_s;
  return j.dump();
}

namespace {

template <class T>
T field(const ojson& j, const char* key, const std::string& line) {
  if (!j.contains(key)) throw InputError(std::string("log line lacks '") + key + "': " + line.substr(0, 120));
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("log field '") + key + "' has the wrong type: " + line.substr(0, 120));
  }
}

std::optional<double> optional_number(const ojson& j, const char* key, const std::string& line) {
  if (!j.contains(key)) throw InputError(std::string("log line lacks '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw InputError(std::string("log field '") + key + "' must be a number: " + line.substr(0, 120));
  return v.get<double>();
}

}  // namespace

TrialLogEntry parse_log_line(const std::string& line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw InputError("malformed log line: " + line.substr(0, 120));
  }
  if (!j.is_object()) throw InputError("log line is not a JSON object: " + line.substr(0, 120));

  TrialLogEntry e;
  e.run = field<std::size_t>(j, "run", line);
  e.optimizer = field<std::string>(j, "optimizer", line);
  e.iteration = field<std::size_t>(j, "iteration", line);
  const auto phase = field<std::string>(j, "phase", line);
  if (phase == "RS")
    e.phase = Phase::rs;
  else if (phase == "WRS")
    e.phase = Phase::wrs;
  else
    throw InputError("unknown phase '" + phase + "' in log");

  if (!j.contains("candidate") || !j["candidate"].is_object())
    throw InputError("log line lacks a candidate object: " + line.substr(0, 120));
  for (const auto& [name, v] : j["candidate"].items()) {
    auto value = detail::value_from_json(v);
    if (!value) throw InputError("candidate value for '" + name + "' must be a number or string");
    e.candidate.emplace_back(name, std::move(*value));
  }
  e.value = optional_number(j, "value", line);
  const bool failed = field<bool>(j, "failed", line);
  if (failed == e.value.has_value())
    throw InputError("log line's 'failed' flag disagrees with its value: " + line.substr(0, 120));
  if (failed && j.contains("error") && j["error"].is_string()) e.error = j["error"].get<std::string>();
  e.changed = field<std::vector<bool>>(j, "changed", line);
  e.best = optional_number(j, "best", line);
  if (j.contains("wall_time_s")) {
    if (!j["wall_time_s"].is_number()) throw InputError("log field 'wall_time_s' must be a number");
    e.wall_time_s = j["wall_time_s"].get<double>();
  }
  return e;
}

void write_trial_log(const std::filesystem::path& path, const std::vector<TrialLogEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write trial log '" + path.string() + "'");
  for (const auto& e : entries) out << format_log_line(e) << '\n';
  out.flush();
  if (!out) throw IoError("failed while writing trial log '" + path.string() + "'");
}

std::vector<TrialLogEntry> read_trial_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read trial log '" + path.string() + "'");
  std::vector<TrialLogEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_log_line(line));
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string strip_timing(const std::string& line) {
  auto j = ojson::parse(line);
  j.erase("wall_time_s");
  return j.dump();
}

}  // namespace wrs::harness
