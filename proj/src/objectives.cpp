#include "wrs/objectives.hpp"

#include <sys/wait.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "json.hpp"
#include "subprocess.hpp"

namespace wrs {

double griewank(std::span<const double> x) {
  double sum = 0.0;
  double prod = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += x[i] * x[i];
    prod *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return 1.0 + sum / 4000.0 - prod;
}

double griewank_modified_6(std::span<const double> x) {
  if (x.size() != 6) throw std::invalid_argument("griewank_modified_6 needs 6 coordinates");
  double sum = 0.0;
  double prod = 1.0;
  for (std::size_t i = 0; i < 6; ++i) {
    sum += static_cast<double>(i) / 4000.0 * x[i] * x[i];
    prod *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return 1.0 + sum - prod;
}

namespace {

Evaluation check_arity(std::size_t arity, const Candidate& x) {
  if (arity != 0 && x.size() != arity)
    return Evaluation::failure("expected " + std::to_string(arity) + " coordinates, got " +
                               std::to_string(x.size()));
  return Evaluation::success(0.0);
}

Evaluation finite_or_failure(double v) {
  if (!std::isfinite(v)) return Evaluation::failure("objective returned a non-finite value");
  return Evaluation::success(v);
}

}  // namespace

RealVectorObjective::RealVectorObjective(std::string name, std::size_t arity, Function f,
                                         double sign)
    : name_(std::move(name)), arity_(arity), f_(std::move(f)), sign_(sign) {}

std::shared_ptr<RealVectorObjective> RealVectorObjective::maximize(std::string name,
                                                                   std::size_t arity, Function f) {
  return std::shared_ptr<RealVectorObjective>(
      new RealVectorObjective(std::move(name), arity, std::move(f), 1.0));
}

std::shared_ptr<RealVectorObjective> RealVectorObjective::minimize(std::string name,
                                                                   std::size_t arity, Function f) {
  return std::shared_ptr<RealVectorObjective>(
      new RealVectorObjective(std::move(name), arity, std::move(f), -1.0));
}

Evaluation RealVectorObjective::evaluate(const SearchSpace&, const Candidate& x) const {
  if (auto e = check_arity(arity_, x); !e.ok()) return e;
  std::vector<double> reals;
  reals.reserve(x.size());
  for (const auto& v : x.values) {
    auto r = as_real(v);
    if (!r) return Evaluation::failure("non-numeric coordinate '" + to_string(v) + "'");
    reals.push_back(*r);
  }
  return finite_or_failure(sign_ * f_(reals));
}

Evaluation FunctionObjective::evaluate(const SearchSpace&, const Candidate& x) const {
  if (auto e = check_arity(arity_, x); !e.ok()) return e;
  try {
    return finite_or_failure(f_(x));
  } catch (const std::exception& ex) {
    return Evaluation::failure(ex.what());
  }
}

Evaluation NegatedObjective::evaluate(const SearchSpace& space, const Candidate& x) const {
  Evaluation e = inner_->evaluate(space, x);
  if (e.ok()) *e.value = -*e.value;
  return e;
}

std::vector<std::string> builtin_names() { return {"griewank", "griewank_modified_6"}; }

std::shared_ptr<RealVectorObjective> make_builtin(const std::string& name, std::size_t arity) {
  if (name == "griewank") {
    if (arity == 0) throw std::invalid_argument("griewank needs a dimension count");
    return RealVectorObjective::minimize("griewank", arity, griewank);
  }
  if (name == "griewank_modified_6") {
    if (arity != 0 && arity != 6)
      throw std::invalid_argument("griewank_modified_6 is six-dimensional");
    return RealVectorObjective::minimize("griewank_modified_6", 6, griewank_modified_6);
  }
  throw std::invalid_argument("unknown built-in objective '" + name + "'");
}

std::string encode_request(const SearchSpace& space, const Candidate& x) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < x.size() && i < space.size(); ++i) {
    std::visit([&](const auto& v) { j[space[i].name()] = v; }, x[i]);
  }
  return j.dump();
}

Evaluation decode_reply(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    return Evaluation::failure("malformed reply: " + line.substr(0, 200));
  }
  if (!j.is_object() || !j.contains("value") || !j["value"].is_number())
    return Evaluation::failure("reply lacks a numeric \"value\": " + line.substr(0, 200));
  return finite_or_failure(j["value"].get<double>());
}

struct ExternalObjective::Persistent {
  std::mutex mutex;
  std::unique_ptr<detail::ChildProcess> child;
};

ExternalObjective::ExternalObjective(CommandSpec spec) : spec_(std::move(spec)) {
  if (spec_.argv.empty()) throw std::invalid_argument("external objective needs a command");
  if (!(spec_.timeout.count() > 0.0))
    throw std::invalid_argument("external objective timeout must be positive");
  if (spec_.persistent) persistent_ = std::make_unique<Persistent>();
}

ExternalObjective::~ExternalObjective() = default;

std::string ExternalObjective::name() const { return "external:" + spec_.argv.front(); }

std::size_t ExternalObjective::max_parallelism() const {
  return spec_.persistent ? 1 : spec_.max_parallel;
}

Evaluation ExternalObjective::evaluate(const SearchSpace& space, const Candidate& x) const {
  if (auto e = check_arity(spec_.arity, x); !e.ok()) return e;
  const std::string request = encode_request(space, x) + "\n";
  return spec_.persistent ? evaluate_persistent(request) : evaluate_once(request);
}

Evaluation ExternalObjective::evaluate_once(const std::string& request) const {
  using Clock = detail::ChildProcess::Clock;
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(spec_.timeout);
  std::unique_ptr<detail::ChildProcess> child;
  try {
    child = std::make_unique<detail::ChildProcess>(spec_.argv);
  } catch (const std::exception& ex) {
    return Evaluation::failure(ex.what());
  }
  // A child that exits without reading stdin breaks the pipe; its exit
  // status then decides the outcome.
  child->write_all(request, deadline);
  child->close_stdin();

  std::string line;
  const auto rs = child->read_line(line, deadline);
  if (rs == detail::ChildProcess::ReadStatus::timeout) {
    child->kill();
    return Evaluation::failure("timeout");
  }
  const auto status = child->wait(deadline);
  if (!status) {
    child->kill();
    return Evaluation::failure("timeout");
  }
  if (!WIFEXITED(*status) || WEXITSTATUS(*status) != 0)
    return Evaluation::failure("evaluator " + detail::describe_status(*status));
  if (rs != detail::ChildProcess::ReadStatus::line)
    return Evaluation::failure("evaluator produced no reply");
  return decode_reply(line);
}

Evaluation ExternalObjective::evaluate_persistent(const std::string& request) const {
  using Clock = detail::ChildProcess::Clock;
  std::lock_guard lock(persistent_->mutex);
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(spec_.timeout);
  auto& child = persistent_->child;
  if (!child) {
    try {
      child = std::make_unique<detail::ChildProcess>(spec_.argv);
    } catch (const std::exception& ex) {
      return Evaluation::failure(ex.what());
    }
  }
  std::string line;
  if (!child->write_all(request, deadline)) {
    child.reset();
    return Evaluation::failure("evaluator stopped accepting requests");
  }
  switch (child->read_line(line, deadline)) {
    case detail::ChildProcess::ReadStatus::line:
      break;
    case detail::ChildProcess::ReadStatus::timeout:
      child.reset();
      return Evaluation::failure("timeout");
    default:
      child.reset();
      return Evaluation::failure("evaluator exited");
  }
  Evaluation e = decode_reply(line);
  // The stream may be out of step after a bad reply; start a fresh child.
  if (!e.ok()) child.reset();
  return e;
}

}  // namespace wrs
