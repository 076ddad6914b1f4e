#include "wrs/harness/commands.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "harness/json_util.hpp"
#include "wrs/engine.hpp"
#include "wrs/harness/errors.hpp"
#include "wrs/objectives.hpp"
#include "wrs/theory.hpp"

namespace wrs::harness {

namespace {

using detail::format_double;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const Value* find_value(const TrialLogEntry& e, const std::string& name) {
  for (const auto& [n, v] : e.candidate)
    if (n == name) return &v;
  return nullptr;
}

}  // namespace

SearchSpace infer_space(const std::vector<TrialLogEntry>& entries) {
  if (entries.empty()) throw InputError("the log holds no trials");
  std::vector<Dimension> dims;
  const auto& first = entries.front().candidate;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const std::string& name = first[i].first;
    bool any_string = false, any_real = false, any_integer = false;
    std::vector<Value> categories;
    double lo = 0.0, hi = 0.0;
    std::int64_t ilo = 0, ihi = 0;
    bool seen = false;
    for (const auto& e : entries) {
      if (e.candidate.size() != first.size())
        throw InputError("log entries disagree on the number of dimensions");
      const Value* v = find_value(e, name);
      if (v == nullptr) throw InputError("log entry lacks dimension '" + name + "'");
      std::visit(overloaded{
                     [&](const std::string& s) {
                       any_string = true;
                       if (std::find(categories.begin(), categories.end(), Value{s}) == categories.end())
                         categories.emplace_back(s);
                     },
                     [&](std::int64_t x) {
                       any_integer = true;
                       ilo = seen ? std::min(ilo, x) : x;
                       ihi = seen ? std::max(ihi, x) : x;
                       const double d = static_cast<double>(x);
                       lo = seen ? std::min(lo, d) : d;
                       hi = seen ? std::max(hi, d) : d;
                       seen = true;
                     },
                     [&](double x) {
                       any_real = true;
                       lo = seen ? std::min(lo, x) : x;
                       hi = seen ? std::max(hi, x) : x;
                       seen = true;
                     },
                 },
                 *v);
    }
    if (any_string && (any_integer || any_real))
      throw InputError("dimension '" + name + "' mixes strings and numbers");
    try {
      if (any_string)
        dims.push_back(Dimension::categorical(name, std::move(categories)));
      else if (any_real)
        dims.push_back(Dimension::real(name, lo, hi));
      else
        dims.push_back(Dimension::integer(name, ilo, ihi));
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  try {
    return SearchSpace(std::move(dims));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

Candidate candidate_in(const SearchSpace& space, const TrialLogEntry& entry) {
  Candidate c;
  c.values.reserve(space.size());
  for (const auto& dim : space.dimensions()) {
    const Value* v = find_value(entry, dim.name());
    if (v == nullptr) throw InputError("log entry lacks dimension '" + dim.name() + "'");
    Value value = *v;
    if (dim.is_real())
      if (const auto* i = std::get_if<std::int64_t>(&value)) value = static_cast<double>(*i);
    if (!dim.contains(value))
      throw InputError("logged value " + to_string(value) + " lies outside dimension '" +
                       dim.name() + "'");
    c.values.push_back(std::move(value));
  }
  return c;
}

std::string importance_table(const std::vector<TrialLogEntry>& entries,
                             const ImportanceOptions& options) {
  std::vector<TrialLogEntry> used;
  for (const auto& e : entries)
    if (!e.failed() && (options.all_phases || e.phase == Phase::rs)) used.push_back(e);
  if (used.size() < kMinImportanceSamples)
    throw InputError("importance needs at least " + std::to_string(kMinImportanceSamples) +
                     " successful trials, the log has " + std::to_string(used.size()));

  const SearchSpace space = options.space ? *options.space : infer_space(used);
  std::vector<Candidate> xs;
  std::vector<double> ys;
  for (const auto& e : used) {
    xs.push_back(candidate_in(space, e));
    ys.push_back(*e.value);
  }

  WeightReport report;
  ChangeSchedule schedule = ChangeSchedule::all_ones(space.size());
  try {
    RandomStream rng(options.seed);
    const auto ensemble = fit_ensemble(space, xs, ys, options.forest, rng);
    report = main_effect_weights(ensemble, space);
    schedule = derive_schedule(report, used.size());
  } catch (const ImportanceError& e) {
    if (e.kind() == ImportanceError::Kind::insufficient_data) throw InputError(e.what());
    throw DegenerateDataError(std::string("cannot estimate importance: ") + e.what());
  }

  std::ostringstream out;
  out << "Parameter";
  for (const auto& d : space.dimensions()) out << ',' << d.name();
  out << "\nWeight";
  for (double w : report.weights) out << ',' << format_double(w);
  out << "\nProbability";
  for (double p : schedule.probs()) out << ',' << format_double(p);
  out << '\n';
  return out.str();
}

std::string importance_from_log(const std::filesystem::path& log, const ImportanceOptions& options) {
  return importance_table(read_trial_log(log), options);
}

std::string theory_csv(const TheoryRequest& request) {
  if (request.n_min == 0) throw InputError("n must be at least 1");
  if (request.n_min > request.n_max) throw InputError("n range is empty");

  std::vector<std::uint64_t> cards;
  for (const auto& s : request.cards) {
    if (s == "inf" || s == "infinity")
      throw InputError("theory applies to discrete dimensions only; got an infinite cardinality");
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || v == 0)
      throw InputError("cardinality '" + s + "' is not a positive integer");
    cards.push_back(v);
  }

  std::optional<theory::DiscreteProfile> profile;
  try {
    profile.emplace(std::move(cards), request.probs, request.distinct);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const double prs = theory::p_rs(*profile);
  const double pwrs = theory::p_wrs(*profile);

  std::ostringstream out;
  out << "n,p_rs,p_wrs,p_rs_n,p_wrs_n\n";
  for (std::uint64_t n = request.n_min; n <= request.n_max; ++n) {
    out << n << ',' << format_double(prs) << ',' << format_double(pwrs) << ','
        << format_double(theory::p_after_n(prs, n)) << ',' << format_double(theory::p_after_n(pwrs, n))
        << '\n';
    if (n == UINT64_MAX) break;
  }
  return out.str();
}

std::string bench_csv(const BenchRequest& request) {
  std::shared_ptr<RealVectorObjective> objective;
  try {
    objective = make_builtin(request.builtin, request.dims);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const std::size_t d = objective->arity();
  if (!(request.low <= request.high)) throw InputError("sampling range is inverted");

  std::vector<std::vector<double>> points = request.points;
  for (const auto& p : points)
    if (p.size() != d)
      throw InputError("point has " + std::to_string(p.size()) + " coordinates, expected " +
                       std::to_string(d));
  RandomStream rng(request.seed);
  for (std::size_t s = 0; s < request.samples; ++s) {
    std::vector<double> p(d);
    for (auto& x : p) x = std::min(request.low + (request.high - request.low) * rng.uniform01(), request.high);
    points.push_back(std::move(p));
  }

  std::ostringstream out;
  for (std::size_t i = 0; i < d; ++i) out << 'x' << (i + 1) << ',';
  out << "f,objective\n";
  for (const auto& p : points) {
    for (double x : p) out << format_double(x) << ',';
    const double f = objective->raw(p);
    out << format_double(f) << ',' << format_double(objective->sign() * f) << '\n';
  }
  return out.str();
}

}  // namespace wrs::harness
