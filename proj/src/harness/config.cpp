#include "wrs/harness/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <unordered_set>

#include "harness/json_util.hpp"
#include "wrs/harness/errors.hpp"

namespace wrs::harness {

namespace detail {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing '" + key + "' in " + where);
  return j.at(key);
}

std::size_t as_count(const json& j, const std::string& what, std::size_t min) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < static_cast<std::int64_t>(min))
    throw ConfigError("'" + what + "' must be an integer >= " + std::to_string(min));
  return j.get<std::size_t>();
}

double as_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError("'" + what + "' must be a number");
  return j.get<double>();
}

std::int64_t as_integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ConfigError("'" + what + "' must be an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
    throw ConfigError("'" + what + "' is out of range");
  return j.get<std::int64_t>();
}

bool is_auto(const json& j) { return j.is_string() && j.get<std::string>() == "auto"; }

ObjectiveSpec parse_objective(const json& j) {
  if (!j.is_object()) throw ConfigError("'objective' must be an object");
  ObjectiveSpec spec;
  if (j.contains("builtin")) {
    reject_unknown_keys(j, {"builtin"}, "objective");
    if (!j["builtin"].is_string()) throw ConfigError("'objective.builtin' must be a string");
    spec.builtin = j["builtin"].get<std::string>();
    const auto names = builtin_names();
    if (std::find(names.begin(), names.end(), spec.builtin) == names.end())
      throw ConfigError("unknown built-in objective '" + spec.builtin + "'");
    return spec;
  }
  reject_unknown_keys(j, {"command", "timeout_s", "persistent", "max_parallel"}, "objective");
  const json& cmd = require(j, "command", "objective (or 'builtin')");
  if (!cmd.is_array() || cmd.empty()) throw ConfigError("'objective.command' must be a non-empty array");
  CommandSpec c;
  for (const auto& a : cmd) {
    if (!a.is_string()) throw ConfigError("'objective.command' entries must be strings");
    c.argv.push_back(a.get<std::string>());
  }
  if (j.contains("timeout_s")) {
    const double t = as_number(j["timeout_s"], "objective.timeout_s");
    if (!(t > 0.0)) throw ConfigError("'objective.timeout_s' must be positive");
    c.timeout = std::chrono::duration<double>(t);
  }
  if (j.contains("persistent")) {
    if (!j["persistent"].is_boolean()) throw ConfigError("'objective.persistent' must be a boolean");
    c.persistent = j["persistent"].get<bool>();
  }
  if (j.contains("max_parallel")) c.max_parallel = as_count(j["max_parallel"], "objective.max_parallel", 1);
  spec.command = std::move(c);
  return spec;
}

ForestSettings parse_importance(const json& j) {
  if (!j.is_object()) throw ConfigError("'importance' must be an object");
  reject_unknown_keys(j, {"trees", "min_samples_leaf", "max_depth", "bootstrap"}, "importance");
  ForestSettings s;
  if (j.contains("trees")) s.n_trees = as_count(j["trees"], "importance.trees", 1);
  if (j.contains("min_samples_leaf"))
    s.min_samples_leaf = as_count(j["min_samples_leaf"], "importance.min_samples_leaf", 1);
  if (j.contains("max_depth")) s.max_depth = as_count(j["max_depth"], "importance.max_depth", 0);
  if (j.contains("bootstrap")) {
    if (!j["bootstrap"].is_boolean()) throw ConfigError("'importance.bootstrap' must be a boolean");
    s.bootstrap = j["bootstrap"].get<bool>();
  }
  return s;
}

}  // namespace

Dimension parse_dimension(const json& j) {
  if (!j.is_object()) throw ConfigError("each space entry must be an object");
  const json& name = require(j, "name", "space entry");
  if (!name.is_string()) throw ConfigError("dimension 'name' must be a string");
  const std::string n = name.get<std::string>();
  const std::string where = "dimension '" + n + "'";
  const json& type = require(j, "type", where);
  if (!type.is_string()) throw ConfigError("'type' of " + where + " must be a string");
  if (j.contains("distribution") &&
      !(j["distribution"].is_string() && j["distribution"].get<std::string>() == "uniform"))
    throw ConfigError(where + ": only the \"uniform\" distribution is supported");

  const std::string t = type.get<std::string>();
  try {
    if (t == "real") {
      reject_unknown_keys(j, {"name", "type", "low", "high", "distribution"}, where);
      return Dimension::real(n, as_number(require(j, "low", where), n + ".low"),
                             as_number(require(j, "high", where), n + ".high"));
    }
    if (t == "integer") {
      reject_unknown_keys(j, {"name", "type", "low", "high", "distribution"}, where);
      return Dimension::integer(n, as_integer(require(j, "low", where), n + ".low"),
                                as_integer(require(j, "high", where), n + ".high"));
    }
    if (t == "categorical") {
      reject_unknown_keys(j, {"name", "type", "values", "distribution"}, where);
      const json& vals = require(j, "values", where);
      if (!vals.is_array()) throw ConfigError("'values' of " + where + " must be an array");
      std::vector<Value> values;
      for (const auto& v : vals) {
        auto parsed = detail::value_from_json(v);
        if (!parsed) throw ConfigError(where + ": values must be numbers or strings");
        values.push_back(std::move(*parsed));
      }
      return Dimension::categorical(n, std::move(values));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError(where + ": unknown type '" + t + "' (expected real, integer or categorical)");
}

nlohmann::ordered_json dimension_to_json(const Dimension& dim) {
  nlohmann::ordered_json j;
  j["name"] = dim.name();
  if (const auto* c = std::get_if<CategoricalDomain>(&dim.domain())) {
    j["type"] = "categorical";
    j["values"] = nlohmann::ordered_json::array();
    for (const auto& v : c->values) j["values"].push_back(detail::value_to_json<nlohmann::ordered_json>(v));
  } else if (const auto* i = std::get_if<IntegerDomain>(&dim.domain())) {
    j["type"] = "integer";
    j["low"] = i->lo;
    j["high"] = i->hi;
  } else {
    const auto& r = std::get<RealDomain>(dim.domain());
    j["type"] = "real";
    j["low"] = r.lo;
    j["high"] = r.hi;
  }
  j["distribution"] = "uniform";
  return j;
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(j,
                      {"space", "objective", "n_total", "n_phase1", "schedule", "change_draws",
                       "n_runs", "base_seed", "optimizers", "parallelism", "output_dir",
                       "importance"},
                      "config");
  ExperimentConfig c;

  const json& space = require(j, "space", "config");
  if (!space.is_array() || space.empty()) throw ConfigError("'space' must be a non-empty array");
  for (const auto& d : space) c.dimensions.push_back(parse_dimension(d));
  try {
    (void)c.space();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::size_t d = c.dimensions.size();

  c.objective = parse_objective(require(j, "objective", "config"));
  if (!c.objective.builtin.empty()) {
    if (c.objective.builtin == "griewank_modified_6" && d != 6)
      throw ConfigError("objective 'griewank_modified_6' needs 6 dimensions, space has " +
                        std::to_string(d));
  }

  c.n_total = as_count(require(j, "n_total", "config"), "n_total", 2);

  if (j.contains("n_phase1") && !is_auto(j["n_phase1"])) {
    c.n_phase1 = as_count(j["n_phase1"], "n_phase1", 1);
    if (*c.n_phase1 >= c.n_total) throw ConfigError("'n_phase1' must be smaller than 'n_total'");
  }

  if (j.contains("schedule") && !is_auto(j["schedule"])) {
    const json& s = j["schedule"];
    if (!s.is_object()) throw ConfigError("'schedule' must be \"auto\" or an object");
    reject_unknown_keys(s, {"probs", "min_samples"}, "schedule");
    const json& probs = require(s, "probs", "schedule");
    if (!probs.is_array() || probs.size() != d)
      throw ConfigError("'schedule.probs' needs one entry per dimension");
    ScheduleOverride o;
    for (const auto& p : probs) o.probs.push_back(as_number(p, "schedule.probs"));
    if (s.contains("min_samples")) {
      const json& k = s["min_samples"];
      if (!k.is_array() || k.size() != d)
        throw ConfigError("'schedule.min_samples' needs one entry per dimension");
      std::vector<std::size_t> ks;
      for (const auto& v : k) ks.push_back(as_count(v, "schedule.min_samples", 0));
      o.min_samples = std::move(ks);
    }
    try {
      (void)ChangeSchedule(o.probs, o.min_samples.value_or(std::vector<std::size_t>(d, 0)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid schedule: ") + e.what());
    }
    c.schedule = std::move(o);
  }

  if (j.contains("change_draws")) {
    const json& m = j["change_draws"];
    if (m == "shared")
      c.independent_draws = false;
    else if (m == "independent")
      c.independent_draws = true;
    else
      throw ConfigError("'change_draws' must be \"shared\" or \"independent\"");
  }

  if (j.contains("n_runs")) c.n_runs = as_count(j["n_runs"], "n_runs", 1);
  if (j.contains("base_seed")) {
    const json& s = j["base_seed"];
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw ConfigError("'base_seed' must be a non-negative integer");
    c.base_seed = s.get<std::uint64_t>();
  }
  if (j.contains("optimizers")) {
    const json& o = j["optimizers"];
    if (!o.is_array() || o.empty()) throw ConfigError("'optimizers' must be a non-empty array");
    c.optimizers.clear();
    for (const auto& name : o) {
      if (name != kOptimizerRs && name != kOptimizerWrs)
        throw ConfigError("'optimizers' entries must be \"RS\" or \"WRS\"");
      const auto s = name.get<std::string>();
      if (std::find(c.optimizers.begin(), c.optimizers.end(), s) != c.optimizers.end())
        throw ConfigError("optimizer '" + s + "' listed twice");
      c.optimizers.push_back(s);
    }
  }
  if (j.contains("parallelism") && !is_auto(j["parallelism"]))
    c.parallelism = as_count(j["parallelism"], "parallelism", 1);
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string() || j["output_dir"].get<std::string>().empty())
      throw ConfigError("'output_dir' must be a non-empty string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("importance")) c.importance = parse_importance(j["importance"]);

  // Runs must never share a stream.
  std::unordered_set<std::uint64_t> seeds;
  for (const auto& opt : c.optimizers)
    for (std::size_t r = 0; r < c.n_runs; ++r)
      if (!seeds.insert(run_seed(c.base_seed, opt, r)).second)
        throw ConfigError("derived run seeds collide; choose another base_seed");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["space"] = nlohmann::ordered_json::array();
  for (const auto& d : c.dimensions) j["space"].push_back(dimension_to_json(d));
  if (c.objective.command) {
    const auto& cmd = *c.objective.command;
    j["objective"]["command"] = cmd.argv;
    j["objective"]["timeout_s"] = cmd.timeout.count();
    j["objective"]["persistent"] = cmd.persistent;
    j["objective"]["max_parallel"] = cmd.max_parallel;
  } else {
    j["objective"]["builtin"] = c.objective.builtin;
  }
  j["n_total"] = c.n_total;
  if (c.n_phase1)
    j["n_phase1"] = *c.n_phase1;
  else
    j["n_phase1"] = "auto";
  if (c.schedule) {
    j["schedule"]["probs"] = c.schedule->probs;
    if (c.schedule->min_samples) j["schedule"]["min_samples"] = *c.schedule->min_samples;
  } else {
    j["schedule"] = "auto";
  }
  j["change_draws"] = c.independent_draws ? "independent" : "shared";
  j["n_runs"] = c.n_runs;
  j["base_seed"] = c.base_seed;
  j["optimizers"] = c.optimizers;
  if (c.parallelism)
    j["parallelism"] = c.parallelism;
  else
    j["parallelism"] = "auto";
  j["output_dir"] = c.output_dir.string();
  j["importance"]["trees"] = c.importance.n_trees;
  j["importance"]["min_samples_leaf"] = c.importance.min_samples_leaf;
  j["importance"]["max_depth"] = c.importance.max_depth;
  j["importance"]["bootstrap"] = c.importance.bootstrap;
  return j;
}

void apply_environment(ExperimentConfig& config) {
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0')
    config.output_dir = dir;
}

std::shared_ptr<Objective> make_objective(const ExperimentConfig& config) {
  const std::size_t d = config.dimensions.size();
  if (config.objective.command) {
    CommandSpec spec = *config.objective.command;
    spec.arity = d;
    return std::make_shared<ExternalObjective>(std::move(spec));
  }
  try {
    return make_builtin(config.objective.builtin, d);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t run_seed(std::uint64_t base_seed, const std::string& optimizer,
                       std::size_t run_index) {
  return derive_seed(derive_seed(base_seed, optimizer), static_cast<std::uint64_t>(run_index));
}

}  // namespace wrs::harness
