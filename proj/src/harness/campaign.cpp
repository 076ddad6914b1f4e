#include "wrs/harness/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <system_error>
#include <thread>

#include "harness/json_util.hpp"
#include "wrs/engine.hpp"
#include "wrs/harness/errors.hpp"
#include "wrs/harness/trial_log.hpp"

namespace wrs::harness {

namespace fs = std::filesystem;

namespace {

struct Job {
  std::string optimizer;
  std::size_t run = 0;
};

RunOutcome summarize_run(const RunHistory& h, const std::string& optimizer, std::size_t run,
                         std::uint64_t seed) {
  RunOutcome o;
  o.optimizer = optimizer;
  o.run = run;
  o.seed = seed;
  o.n_phase1 = h.n_phase1;
  o.schedule = h.schedule;
  o.weights = h.weights;
  o.warning = h.warning;
  o.curve.reserve(h.trials.size());
  std::optional<double> best;
  for (const auto& t : h.trials) {
    if (t.failed()) ++o.failed_trials;
    if (t.value && (!best || *t.value >= *best)) best = t.value;
    o.curve.push_back(best);
  }
  o.best = best;
  return o;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'" +
                  (ec ? ": " + ec.message() : std::string()));
}

class CsvFile {
 public:
  explicit CsvFile(const fs::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot write '" + path.string() + "'");
  }
  std::ofstream& stream() { return out_; }
  void close() {
    out_.flush();
    if (!out_) throw IoError("failed while writing '" + path_.string() + "'");
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

std::string num(double v) { return detail::format_double(v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

void write_summary(const fs::path& path, const std::vector<OptimizerSummary>& summaries,
                   const std::optional<stats::TTestResult>& t) {
  CsvFile f(path);
  auto& out = f.stream();
  out << "optimizer,best,mean,sd,n_runs,t,df,se,p_value\n";
  for (const auto& s : summaries) {
    out << s.optimizer << ',';
    if (s.summary)
      out << num(s.summary->best) << ',' << num(s.summary->mean) << ',' << num(s.summary->sd) << ','
          << s.summary->n_runs;
    else
      out << ",,,0";
    out << ",,,,\n";
  }
  if (t) {
    out << kOptimizerWrs << "_vs_" << kOptimizerRs << ",,,,," << num(t->t) << ',' << num(t->df) << ','
        << num(t->standard_error) << ',' << num(t->p_value) << '\n';
  }
  f.close();
}

void write_convergence(const fs::path& path, const std::vector<const RunOutcome*>& runs,
                       std::size_t n_total) {
  CsvFile f(path);
  auto& out = f.stream();
  out << "iteration";
  for (const auto* r : runs) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%04zu", r->run);
    out << ',' << name;
  }
  out << ",mean\n";
  for (std::size_t k = 0; k < n_total; ++k) {
    out << (k + 1);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto* r : runs) {
      const auto& v = r->curve[k];
      out << ',' << opt_num(v);
      if (v) {
        sum += *v;
        ++n;
      }
    }
    out << ',' << (n > 0 ? num(sum / static_cast<double>(n)) : std::string()) << '\n';
  }
  f.close();
}

void write_schedules(const fs::path& path, const SearchSpace& space,
                     const std::vector<const RunOutcome*>& runs) {
  CsvFile f(path);
  auto& out = f.stream();
  out << "run,n_phase1,fallback";
  for (const auto& d : space.dimensions()) out << ",p_" << d.name();
  for (const auto& d : space.dimensions()) out << ",k_" << d.name();
  for (const auto& d : space.dimensions()) out << ",w_" << d.name();
  out << '\n';
  for (const auto* r : runs) {
    out << r->run << ',' << r->n_phase1 << ',' << (r->warning ? 1 : 0);
    for (std::size_t i = 0; i < space.size(); ++i)
      out << ',' << (r->schedule ? num(r->schedule->probs()[i]) : std::string());
    for (std::size_t i = 0; i < space.size(); ++i)
      out << ',' << (r->schedule ? std::to_string(r->schedule->min_samples()[i]) : std::string());
    for (std::size_t i = 0; i < space.size(); ++i)
      out << ',' << (r->weights ? num(r->weights->weights[i]) : std::string());
    out << '\n';
  }
  f.close();
}

std::size_t worker_count(const ExperimentConfig& config, const Objective& objective,
                         std::size_t jobs) {
  std::size_t n = config.parallelism;
  if (n == 0) n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (objective.max_parallelism() > 0) n = std::min(n, objective.max_parallelism());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

}  // namespace

fs::path log_path(const std::string& optimizer, std::size_t run_index) {
  char name[64];
  std::snprintf(name, sizeof name, "_run%04zu.jsonl", run_index);
  return fs::path("logs") / (optimizer + name);
}

RunHistory execute_run(const ExperimentConfig& config, const SearchSpace& space,
                       const Objective& objective, const std::string& optimizer,
                       std::size_t run_index) {
  auto streams = RunStreams::from_seed(run_seed(config.base_seed, optimizer, run_index));
  if (optimizer == kOptimizerRs) return run_random_search(space, objective, config.n_total, streams);
  if (optimizer != kOptimizerWrs) throw ConfigError("unknown optimizer '" + optimizer + "'");

  RunSettings settings;
  settings.n_total = config.n_total;
  settings.n_phase1 = config.n_phase1;
  settings.forest = config.importance;
  settings.step.independent_draws = config.independent_draws;
  if (config.schedule) {
    const std::size_t n0 = config.n_phase1.value_or(default_phase_split(config.n_total));
    settings.schedule = ChangeSchedule(
        config.schedule->probs,
        config.schedule->min_samples.value_or(std::vector<std::size_t>(space.size(), n0)));
  }
  return run(space, objective, settings, streams);
}

CampaignResult run_campaign(const ExperimentConfig& config,
                            const std::function<void(const RunOutcome&)>& progress) {
  const SearchSpace space = config.space();
  const auto objective = make_objective(config);

  CampaignResult result;
  result.output_dir = config.output_dir;
  ensure_directory(config.output_dir);
  ensure_directory(config.output_dir / "logs");
  {
    std::ofstream out(config.output_dir / "config.resolved.json", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write into output directory '" + config.output_dir.string() + "'");
    out << to_json(config).dump(2) << '\n';
    if (!out) throw IoError("failed while writing the resolved config");
  }

  std::vector<Job> jobs;
  for (const auto& opt : config.optimizers)
    for (std::size_t r = 0; r < config.n_runs; ++r) jobs.push_back({opt, r});
  result.runs.resize(jobs.size());
  for (const auto& j : jobs) result.log_files.push_back(config.output_dir / log_path(j.optimizer, j.run));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    while (!abort.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        const auto& job = jobs[i];
        const auto history = execute_run(config, space, *objective, job.optimizer, job.run);
        write_trial_log(result.log_files[i], log_entries(history, job.run, job.optimizer));
        result.runs[i] = summarize_run(history, job.optimizer, job.run,
                                       run_seed(config.base_seed, job.optimizer, job.run));
        if (progress) {
          std::lock_guard lock(mutex);
          progress(result.runs[i]);
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!first_error) first_error = std::current_exception();
        abort.store(true);
      }
    }
  };

  const std::size_t n_workers = worker_count(config, *objective, jobs.size());
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::map<std::string, std::vector<double>> bests;
  for (const auto& opt : config.optimizers) {
    std::vector<const RunOutcome*> runs;
    for (const auto& r : result.runs)
      if (r.optimizer == opt) runs.push_back(&r);
    auto& b = bests[opt];
    for (const auto* r : runs)
      if (r->best) b.push_back(*r->best);
    OptimizerSummary s{opt, std::nullopt};
    if (!b.empty()) s.summary = stats::summarize(b);
    result.summaries.push_back(std::move(s));

    write_convergence(config.output_dir / ("convergence_" + opt + ".csv"), runs, config.n_total);
    if (opt == kOptimizerWrs) write_schedules(config.output_dir / "schedules.csv", space, runs);
  }

  const auto wrs = bests.find(kOptimizerWrs);
  const auto rs = bests.find(kOptimizerRs);
  if (wrs != bests.end() && rs != bests.end() && wrs->second.size() >= 2 && rs->second.size() >= 2)
    result.t_test = stats::pooled_t_test(wrs->second, rs->second);

  write_summary(config.output_dir / "summary.csv", result.summaries, result.t_test);
  return result;
}

std::map<std::string, std::vector<double>> bests_from_logs(const fs::path& output_dir,
                                                           const ExperimentConfig& config) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& opt : config.optimizers) {
    auto& b = out[opt];
    for (std::size_t r = 0; r < config.n_runs; ++r) {
      std::optional<double> best;
      for (const auto& e : read_trial_log(output_dir / log_path(opt, r)))
        if (e.value && (!best || *e.value >= *best)) best = e.value;
      if (best) b.push_back(*best);
    }
  }
  return out;
}

}  // namespace wrs::harness
