#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wrs/space.hpp"

namespace wrs {

/// Outcome of one objective evaluation.
struct Evaluation {
  std::optional<double> value;
  std::string error;

  static Evaluation success(double v) { return Evaluation{v, {}}; }
  static Evaluation failure(std::string why) { return Evaluation{std::nullopt, std::move(why)}; }

  bool ok() const noexcept { return value.has_value(); }
};

/// An objective to be maximized.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;

  /// Number of coordinates expected; 0 accepts any arity.
  virtual std::size_t arity() const = 0;

  virtual Evaluation evaluate(const SearchSpace& space, const Candidate& x) const = 0;

  /// Upper bound on concurrent evaluate() calls; 0 means unbounded.
  virtual std::size_t max_parallelism() const { return 0; }
};

/// Griewank function G_d; cos(x_i / sqrt(i)) with 1-based i.
double griewank(std::span<const double> x);

/// Modified six-dimensional Griewank G*_6: the quadratic term of dimension i
/// is weighted by (i - 1) / 4000, so dimension 1 has no quadratic term.
/// Throws std::invalid_argument unless x has 6 entries.
double griewank_modified_6(std::span<const double> x);

/// Objective over real vectors. Integer and numeric categorical values are
/// widened to double; a string coordinate fails the evaluation.
class RealVectorObjective final : public Objective {
 public:
  using Function = std::function<double(std::span<const double>)>;

  /// `f` is maximized as given.
  static std::shared_ptr<RealVectorObjective> maximize(std::string name, std::size_t arity,
                                                       Function f);
  /// `f` is minimized by maximizing -f.
  static std::shared_ptr<RealVectorObjective> minimize(std::string name, std::size_t arity,
                                                       Function f);

  std::string name() const override { return name_; }
  std::size_t arity() const override { return arity_; }
  Evaluation evaluate(const SearchSpace& space, const Candidate& x) const override;

  /// Raw f(x) before the sign flip.
  double raw(std::span<const double> x) const { return f_(x); }
  double sign() const noexcept { return sign_; }

 private:
  RealVectorObjective(std::string name, std::size_t arity, Function f, double sign);

  std::string name_;
  std::size_t arity_;
  Function f_;
  double sign_;
};

/// Objective defined directly on candidates; exceptions thrown by the
/// callable become failed evaluations.
class FunctionObjective final : public Objective {
 public:
  using Function = std::function<double(const Candidate&)>;

  FunctionObjective(std::string name, std::size_t arity, Function f)
      : name_(std::move(name)), arity_(arity), f_(std::move(f)) {}

  std::string name() const override { return name_; }
  std::size_t arity() const override { return arity_; }
  Evaluation evaluate(const SearchSpace& space, const Candidate& x) const override;

 private:
  std::string name_;
  std::size_t arity_;
  Function f_;
};

/// Maximizes -f for an objective f.
class NegatedObjective final : public Objective {
 public:
  explicit NegatedObjective(std::shared_ptr<const Objective> inner) : inner_(std::move(inner)) {}

  std::string name() const override { return "neg_" + inner_->name(); }
  std::size_t arity() const override { return inner_->arity(); }
  std::size_t max_parallelism() const override { return inner_->max_parallelism(); }
  Evaluation evaluate(const SearchSpace& space, const Candidate& x) const override;

 private:
  std::shared_ptr<const Objective> inner_;
};

/// Names accepted by make_builtin.
std::vector<std::string> builtin_names();

/// Built-in benchmark, already negated for maximization:
///   "griewank"            -> -G_d with d = `arity`
///   "griewank_modified_6" -> -G*_6 (arity must be 6 or 0)
/// Throws std::invalid_argument for unknown names or a bad arity.
std::shared_ptr<RealVectorObjective> make_builtin(const std::string& name, std::size_t arity);

/// How to launch an external evaluator.
struct CommandSpec {
  std::vector<std::string> argv;
  std::chrono::duration<double> timeout{3600.0};
  /// Keep one child alive and send it one request line per evaluation.
  bool persistent = false;
  std::size_t max_parallel = 1;
  std::size_t arity = 0;
};

/// Child-process objective speaking newline-delimited JSON.
///
/// Each request is one line `{"<dimension name>": value, ...}` on the
/// child's stdin; the reply is one line `{"value": <real>}` on its stdout.
/// In one-shot mode the child must also exit with status 0. Timeouts,
/// malformed replies, nonzero exits and crashes are failed evaluations.
class ExternalObjective final : public Objective {
 public:
  /// Throws std::invalid_argument for an empty argv or non-positive timeout.
  explicit ExternalObjective(CommandSpec spec);
  ~ExternalObjective() override;

  ExternalObjective(const ExternalObjective&) = delete;
  ExternalObjective& operator=(const ExternalObjective&) = delete;

  std::string name() const override;
  std::size_t arity() const override { return spec_.arity; }
  std::size_t max_parallelism() const override;
  Evaluation evaluate(const SearchSpace& space, const Candidate& x) const override;

  const CommandSpec& spec() const noexcept { return spec_; }

 private:
  struct Persistent;

  Evaluation evaluate_once(const std::string& request) const;
  Evaluation evaluate_persistent(const std::string& request) const;

  CommandSpec spec_;
  std::unique_ptr<Persistent> persistent_;
};

/// The request line for `x` (without the trailing newline).
std::string encode_request(const SearchSpace& space, const Candidate& x);

/// Parses a reply line; failure on anything other than an object holding a
/// finite numeric "value".
Evaluation decode_reply(const std::string& line);

}  // namespace wrs
