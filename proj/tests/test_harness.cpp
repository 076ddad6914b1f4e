#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "harness/json_util.hpp"
#include "wrs/engine.hpp"
#include "wrs/harness/campaign.hpp"
#include "wrs/harness/commands.hpp"
#include "wrs/harness/config.hpp"
#include "wrs/harness/errors.hpp"
#include "wrs/harness/trial_log.hpp"

using namespace wrs;
using namespace wrs::harness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("wrs_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

json g6_config(std::size_t n_total, std::size_t n_runs, const fs::path& out) {
  json space = json::array();
  for (int i = 1; i <= 6; ++i)
    space.push_back({{"name", "x" + std::to_string(i)}, {"type", "real"}, {"low", -600}, {"high", 600}});
  return {{"space", space},
          {"objective", {{"builtin", "griewank_modified_6"}}},
          {"n_total", n_total},
          {"n_runs", n_runs},
          {"base_seed", 11},
          {"optimizers", {"RS", "WRS"}},
          {"output_dir", out.string()}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

int run_cli(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const std::string cmd = std::string(WRS_CLI) + " " + args + " > " + stdout_file.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("config parsing and defaults") {
  TempDir dir;
  const auto c = parse_config(g6_config(100, 3, dir.path()));
  CHECK(c.dimensions.size() == 6);
  CHECK(c.n_total == 100);
  CHECK_FALSE(c.n_phase1.has_value());
  CHECK_FALSE(c.schedule.has_value());
  CHECK(c.n_runs == 3);
  CHECK(c.base_seed == 11);
  CHECK(c.optimizers == std::vector<std::string>{"RS", "WRS"});
  CHECK(c.importance.n_trees == 32);

  // Round trip through the resolved form.
  const auto again = parse_config(json::parse(to_json(c).dump()));
  CHECK(to_json(again) == to_json(c));
}

TEST_CASE("config errors are ConfigError") {
  TempDir dir;
  auto base = g6_config(100, 2, dir.path());
  auto expect_error = [](json j) { CHECK_THROWS_AS(parse_config(j), ConfigError); };

  auto j = base;
  j["bogus"] = 1;
  expect_error(j);
  j = base;
  j.erase("space");
  expect_error(j);
  j = base;
  j["space"].erase(0);
  expect_error(j);  // arity 5 vs griewank_modified_6
  j = base;
  j["n_runs"] = 0;
  expect_error(j);
  j = base;
  j["n_total"] = 1;
  expect_error(j);
  j = base;
  j["n_phase1"] = 100;
  expect_error(j);
  j = base;
  j["optimizers"] = {"RS", "SA"};
  expect_error(j);
  j = base;
  j["optimizers"] = {"RS", "RS"};
  expect_error(j);
  j = base;
  j["space"][0]["low"] = 700;
  expect_error(j);
  j = base;
  j["space"][1]["name"] = "x1";
  expect_error(j);
  j = base;
  j["space"][0]["type"] = "complex";
  expect_error(j);
  j = base;
  j["space"][0]["distribution"] = "log";
  expect_error(j);
  j = base;
  j["schedule"] = {{"probs", {0.5, 0.5, 0.5, 0.5, 0.5, 0.5}}};
  expect_error(j);
  j = base;
  j["schedule"] = {{"probs", {1, 1}}};
  expect_error(j);
  j = base;
  j["objective"] = {{"builtin", "nope"}};
  CHECK_THROWS_AS(make_objective(parse_config(j)), ConfigError);
  j = base;
  j["objective"] = {{"command", json::array()}};
  expect_error(j);
  j = base;
  j["change_draws"] = "sometimes";
  expect_error(j);
  j = base;
  j["base_seed"] = -1;
  expect_error(j);

  CHECK_THROWS_AS(load_config(dir.path() / "missing.json"), ConfigError);
  write_file(dir.path() / "bad.json", "{not json");
  CHECK_THROWS_AS(load_config(dir.path() / "bad.json"), ConfigError);
}

TEST_CASE("run seeds are distinct per optimizer and run") {
  std::set<std::uint64_t> seen;
  for (const char* opt : {"RS", "WRS"})
    for (std::size_t r = 0; r < 5000; ++r) seen.insert(run_seed(2024, opt, r));
  CHECK(seen.size() == 10000);
}

TEST_CASE("output directory override") {
  TempDir dir;
  auto c = parse_config(g6_config(10, 1, dir.path()));
  ::setenv(kOutputDirEnv, "/tmp/elsewhere", 1);
  apply_environment(c);
  ::unsetenv(kOutputDirEnv);
  CHECK(c.output_dir == "/tmp/elsewhere");
}

TEST_CASE("trial log lines round-trip") {
  TrialLogEntry e;
  e.run = 3;
  e.optimizer = "WRS";
  e.iteration = 17;
  e.phase = Phase::wrs;
  e.candidate = {{"lr", Value{0.1}}, {"layers", Value{std::int64_t{4}}}, {"act", Value{std::string("relu")}}};
  e.value = -0.30000000000000004;
  e.changed = {true, false, true};
  e.best = 1e-300;
  e.wall_time_s = 0.25;
  const auto line = format_log_line(e);
  CHECK(parse_log_line(line) == e);
  CHECK(line.rfind(R"({"run":3,"optimizer":"WRS","iteration":17,"phase":"WRS","candidate":{"lr":0.1,"layers":4,"act":"relu"},"value":)", 0) == 0);

  TrialLogEntry f = e;
  f.value.reset();
  f.error = "timeout";
  f.best.reset();
  const auto fl = format_log_line(f);
  CHECK(fl.find(R"("value":null,"failed":true,"error":"timeout")") != std::string::npos);
  CHECK(parse_log_line(fl) == f);
  CHECK(strip_timing(fl).find("wall_time_s") == std::string::npos);

  CHECK_THROWS_AS(parse_log_line("{"), InputError);
  CHECK_THROWS_AS(parse_log_line("[]"), InputError);
  CHECK_THROWS_AS(parse_log_line(R"({"run":0})"), InputError);
}

TEST_CASE("campaign artifacts") {
  TempDir dir;
  const auto c = parse_config(g6_config(1000, 2, dir.path() / "out"));
  const auto result = run_campaign(c);
  const auto out = dir.path() / "out";
  CHECK(fs::exists(out / "config.resolved.json"));
  std::size_t logs = 0;
  for (const auto& entry : fs::directory_iterator(out / "logs")) logs += entry.path().extension() == ".jsonl";
  CHECK(logs == 4);
  for (const char* name : {"RS_run0000.jsonl", "RS_run0001.jsonl", "WRS_run0000.jsonl", "WRS_run0001.jsonl"})
    CHECK(fs::exists(out / "logs" / name));

  const auto summary = lines_of(out / "summary.csv");
  REQUIRE(summary.size() == 4);
  CHECK(summary[0] == "optimizer,best,mean,sd,n_runs,t,df,se,p_value");
  CHECK(summary[1].rfind("RS,", 0) == 0);
  CHECK(summary[2].rfind("WRS,", 0) == 0);
  CHECK(summary[3].rfind("WRS_vs_RS,", 0) == 0);
  CHECK(split(summary[3], ',')[6] == "2");

  for (const char* opt : {"RS", "WRS"}) {
    const auto conv = lines_of(out / (std::string("convergence_") + opt + ".csv"));
    REQUIRE(conv.size() == 1001);
    CHECK(conv[0] == "iteration,run_0000,run_0001,mean");
  }
  const auto sched = lines_of(out / "schedules.csv");
  CHECK(sched.size() == 3);

  // Log completeness and a non-decreasing best column.
  for (const auto& path : result.log_files) {
    const auto entries = read_trial_log(path);
    CHECK(entries.size() == 1000);
    std::optional<double> prev;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      CHECK(entries[k].iteration == k + 1);
      CHECK(entries[k].candidate.size() == 6);
      if (prev) CHECK(*entries[k].best >= *prev);
      prev = entries[k].best;
    }
  }
  const auto wrs_log = read_trial_log(out / "logs" / "WRS_run0000.jsonl");
  CHECK(wrs_log[367].phase == Phase::rs);
  CHECK(wrs_log[368].phase == Phase::wrs);
}

TEST_CASE("summary values are recomputable from the logs") {
  TempDir dir;
  const auto c = parse_config(g6_config(200, 4, dir.path()));
  (void)run_campaign(c);
  const auto bests = bests_from_logs(dir.path(), c);
  const auto summary = lines_of(dir.path() / "summary.csv");
  for (std::size_t row = 1; row <= 2; ++row) {
    const auto cells = split(summary[row], ',');
    const auto s = stats::summarize(bests.at(cells[0]));
    CHECK(cells[1] == detail::format_double(s.best));
    CHECK(cells[2] == detail::format_double(s.mean));
    CHECK(cells[3] == detail::format_double(s.sd));
    CHECK(cells[4] == std::to_string(s.n_runs));
  }
  const auto t = stats::pooled_t_test(bests.at("WRS"), bests.at("RS"));
  const auto cells = split(summary[3], ',');
  CHECK(cells[5] == detail::format_double(t.t));
  CHECK(cells[8] == detail::format_double(t.p_value));

  // Convergence means recompute from the per-run columns.
  const auto conv = lines_of(dir.path() / "convergence_WRS.csv");
  for (std::size_t k = 1; k < conv.size(); k += 37) {
    const auto row = split(conv[k], ',');
    double sum = 0;
    for (std::size_t r = 1; r + 1 < row.size(); ++r) sum += std::stod(row[r]);
    CHECK(std::stod(row.back()) == doctest::Approx(sum / 4.0).epsilon(1e-15));
  }
}

TEST_CASE("campaign replays byte-identically apart from timing") {
  TempDir a, b;
  auto ja = g6_config(300, 3, a.path());
  ja["parallelism"] = 3;
  auto jb = g6_config(300, 3, b.path());
  jb["parallelism"] = 1;
  const auto ra = run_campaign(parse_config(ja));
  const auto rb = run_campaign(parse_config(jb));
  REQUIRE(ra.log_files.size() == rb.log_files.size());
  for (std::size_t i = 0; i < ra.log_files.size(); ++i) {
    const auto la = lines_of(ra.log_files[i]);
    const auto lb = lines_of(rb.log_files[i]);
    REQUIRE(la.size() == lb.size());
    for (std::size_t k = 0; k < la.size(); ++k) CHECK(strip_timing(la[k]) == strip_timing(lb[k]));
  }
  CHECK(slurp(a.path() / "summary.csv") == slurp(b.path() / "summary.csv"));
  CHECK(slurp(a.path() / "convergence_RS.csv") == slurp(b.path() / "convergence_RS.csv"));
}

TEST_CASE("singleton space campaign") {
  TempDir dir;
  json j = {{"space", {{{"name", "n"}, {"type", "integer"}, {"low", 3}, {"high", 3}},
                       {{"name", "c"}, {"type", "categorical"}, {"values", {"only"}}}}},
            {"objective", {{"command", {WRS_STUB_OBJECTIVE, "const"}}, {"timeout_s", 10}}},
            {"n_total", 5},
            {"optimizers", {"WRS"}},
            {"output_dir", dir.path().string()}};
  const auto result = run_campaign(parse_config(j));
  const auto entries = read_trial_log(result.log_files.at(0));
  REQUIRE(entries.size() == 5);
  for (const auto& e : entries) {
    CHECK(e.candidate == entries.front().candidate);
    CHECK(e.best == 1.0);
  }
}

TEST_CASE("external failures are logged and the campaign continues") {
  TempDir dir;
  auto j = g6_config(20, 2, dir.path());
  j["objective"] = {{"command", {WRS_STUB_OBJECTIVE, "fail"}}, {"max_parallel", 2}};
  j["optimizers"] = {"WRS"};
  const auto result = run_campaign(parse_config(j));
  for (const auto& r : result.runs) {
    CHECK(r.failed_trials == 20);
    CHECK(r.warning.has_value());
    CHECK_FALSE(r.best.has_value());
  }
  const auto entries = read_trial_log(result.log_files.at(0));
  CHECK(entries.size() == 20);
  for (const auto& e : entries) CHECK(e.failed());
  const auto summary = lines_of(dir.path() / "summary.csv");
  CHECK(summary.at(1) == "WRS,,,,0,,,,");
}

TEST_CASE("explicit schedule override is used verbatim") {
  TempDir dir;
  auto j = g6_config(100, 1, dir.path());
  j["optimizers"] = {"WRS"};
  j["n_phase1"] = 10;
  j["schedule"] = {{"probs", {0.01, 0.01, 0.01, 0.01, 0.01, 1}}, {"min_samples", {50, 10, 10, 10, 10, 10}}};
  const auto c = parse_config(j);
  const auto h = execute_run(c, c.space(), *make_objective(c), "WRS", 0);
  CHECK(h.schedule->probs() == std::vector<double>{0.01, 0.01, 0.01, 0.01, 0.01, 1});
  CHECK(h.schedule->min_samples()[0] == 50);
  CHECK_FALSE(h.weights.has_value());
  for (std::size_t k = 10; k < 50; ++k) CHECK(h.trials[k].changed[0]);
}

TEST_CASE("unwritable output directory is an I/O error") {
  TempDir dir;
  write_file(dir.path() / "file", "x");
  const auto c = parse_config(g6_config(10, 1, dir.path() / "file" / "sub"));
  CHECK_THROWS_AS(run_campaign(c), IoError);
}

TEST_CASE("importance command on an additive log") {
  SearchSpace space({Dimension::real("x1", 0, 1), Dimension::real("x2", 0, 1)});
  RandomStream rng(1);
  std::vector<TrialLogEntry> entries;
  for (std::size_t k = 1; k <= 368; ++k) {
    const auto c = sample_candidate(space, rng);
    TrialLogEntry e;
    e.iteration = k;
    e.candidate = {{"x1", c[0]}, {"x2", c[1]}};
    e.value = std::get<double>(c[0]);
    e.changed = {true, true};
    entries.push_back(e);
  }
  const auto table = split(importance_table(entries, {}), '\n');
  REQUIRE(table.size() >= 3);
  CHECK(table[0] == "Parameter,x1,x2");
  const auto w = split(table[1], ',');
  const auto p = split(table[2], ',');
  CHECK(w[0] == "Weight");
  CHECK(std::stod(w[1]) > std::stod(w[2]));
  CHECK(p[0] == "Probability");
  CHECK(p[1] == "1");

  std::vector<TrialLogEntry> flat = entries;
  for (auto& e : flat) e.value = 5.0;
  CHECK_THROWS_AS(importance_table(flat, {}), DegenerateDataError);
  std::vector<TrialLogEntry> one(entries.begin(), entries.begin() + 1);
  CHECK_THROWS_AS(importance_table(one, {}), InputError);
}

TEST_CASE("infer_space and candidate_in") {
  std::vector<TrialLogEntry> entries(2);
  entries[0].candidate = {{"a", Value{std::string("x")}}, {"n", Value{std::int64_t{3}}}, {"r", Value{std::int64_t{1}}}};
  entries[1].candidate = {{"a", Value{std::string("y")}}, {"n", Value{std::int64_t{9}}}, {"r", Value{2.5}}};
  const auto s = infer_space(entries);
  CHECK(s[0].is_categorical());
  CHECK(s[1].is_integer());
  CHECK(cardinality(s[1]) == 7u);
  CHECK(s[2].is_real());
  CHECK(std::get<double>(candidate_in(s, entries[0])[2]) == 1.0);
  entries[1].candidate[0].second = Value{std::int64_t{1}};
  CHECK_THROWS_AS(infer_space(entries), InputError);
}

TEST_CASE("theory command") {
  TheoryRequest r;
  r.cards = {"10", "10"};
  r.probs = {1, 0.5};
  r.distinct = {1, 2};
  r.n_min = 1;
  r.n_max = 3;
  const auto rows = split(theory_csv(r), '\n');
  REQUIRE(rows.size() >= 4);
  CHECK(rows[0] == "n,p_rs,p_wrs,p_rs_n,p_wrs_n");
  for (std::size_t i = 1; i <= 3; ++i) {
    const auto c = split(rows[i], ',');
    CHECK(std::stoul(c[0]) == i);
    CHECK(std::stod(c[2]) >= std::stod(c[1]));
    CHECK(std::stod(c[4]) >= std::stod(c[3]));
  }
  r.probs = {1, 1};
  for (const auto& row : split(theory_csv(r), '\n')) {
    if (row.empty() || row[0] == 'n') continue;
    const auto c = split(row, ',');
    CHECK(c[1] == c[2]);
    CHECK(c[3] == c[4]);
  }
  r.n_min = 0;
  CHECK_THROWS_AS(theory_csv(r), InputError);
  r.n_min = 1;
  r.cards = {"10", "inf"};
  CHECK_THROWS_AS(theory_csv(r), InputError);
  r.cards = {"10", "ten"};
  CHECK_THROWS_AS(theory_csv(r), InputError);
}

TEST_CASE("bench command") {
  BenchRequest r;
  r.builtin = "griewank_modified_6";
  r.points = {std::vector<double>(6, 0.0)};
  r.samples = 3;
  const auto rows = split(bench_csv(r), '\n');
  CHECK(rows[0] == "x1,x2,x3,x4,x5,x6,f,objective");
  CHECK(rows[1] == "0,0,0,0,0,0,0,-0");
  CHECK(rows.size() >= 5);
  r.points = {{1.0}};
  CHECK_THROWS_AS(bench_csv(r), InputError);
  r.builtin = "nope";
  CHECK_THROWS_AS(bench_csv(r), InputError);
}

TEST_CASE("CLI exit codes") {
  TempDir dir;
  const auto out = dir.path() / "out";
  write_file(dir.path() / "good.json", g6_config(30, 1, out).dump());
  write_file(dir.path() / "bad.json", R"({"space": []})");
  auto unwritable = g6_config(30, 1, dir.path() / "good.json" / "x");
  write_file(dir.path() / "unwritable.json", unwritable.dump());

  CHECK(run_cli("run -q " + (dir.path() / "good.json").string()) == 0);
  CHECK(fs::exists(out / "summary.csv"));
  CHECK(run_cli("compare -q " + (dir.path() / "good.json").string()) == 0);
  CHECK(fs::exists(out / "logs" / "RS_run0000.jsonl"));
  CHECK(run_cli("run -q " + (dir.path() / "bad.json").string()) == 2);
  CHECK(run_cli("run -q " + (dir.path() / "missing.json").string()) == 2);
  CHECK(run_cli("run -q " + (dir.path() / "unwritable.json").string()) == 3);

  const auto env_out = dir.path() / "env_out";
  const std::string env_cmd = "WRS_OUTPUT_DIR=" + env_out.string() + " " + WRS_CLI + " run -q " +
                              (dir.path() / "good.json").string() + " >/dev/null 2>&1";
  CHECK(std::system(env_cmd.c_str()) == 0);
  CHECK(fs::exists(env_out / "summary.csv"));

  const auto log = out / "logs" / "WRS_run0000.jsonl";
  CHECK(run_cli("importance " + log.string(), dir.path() / "imp.csv") == 0);
  CHECK(lines_of(dir.path() / "imp.csv").size() == 3);
  CHECK(run_cli("importance --config " + (dir.path() / "good.json").string() + " " + log.string()) == 0);
  CHECK(run_cli("importance " + (dir.path() / "nope.jsonl").string()) == 2);

  write_file(dir.path() / "one.jsonl", lines_of(log).at(0) + "\n");
  CHECK(run_cli("importance " + (dir.path() / "one.jsonl").string()) == 2);
  write_file(dir.path() / "garbage.jsonl", "not a log\n");
  CHECK(run_cli("importance " + (dir.path() / "garbage.jsonl").string()) == 2);

  // Constant objective log.
  std::ostringstream flat;
  for (std::size_t k = 1; k <= 20; ++k) {
    TrialLogEntry e;
    e.iteration = k;
    e.optimizer = "RS";
    e.candidate = {{"x", Value{static_cast<double>(k)}}};
    e.value = 1.0;
    e.best = 1.0;
    e.changed = {true};
    flat << format_log_line(e) << '\n';
  }
  write_file(dir.path() / "flat.jsonl", flat.str());
  CHECK(run_cli("importance " + (dir.path() / "flat.jsonl").string()) == 4);

  CHECK(run_cli("theory --cards 10,10 --probs 1,0.5 --distinct 1,2 --n-min 1 --n-max 3",
                dir.path() / "th.csv") == 0);
  CHECK(lines_of(dir.path() / "th.csv").size() == 4);
  CHECK(run_cli("theory --cards 10,inf --probs 1,0.5 --distinct 1,2") == 2);
  CHECK(run_cli("theory --cards 10,10 --probs 1,0.5 --distinct 1,2 --n-min 0") == 2);
  CHECK(run_cli("bench griewank_modified_6 -p 0,0,0,0,0,0", dir.path() / "b.csv") == 0);
  CHECK(lines_of(dir.path() / "b.csv").at(1) == "0,0,0,0,0,0,0,-0");
  CHECK(run_cli("bench griewank -d 2 -n 5") == 0);
  CHECK(run_cli("bench nope") == 2);
  CHECK(run_cli("frobnicate") == 2);
}
