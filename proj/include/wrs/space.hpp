#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wrs/rng.hpp"

namespace wrs {

/// A coordinate value. Integer domains hold int64, real domains hold double;
/// categorical domains may hold any of the three.
using Value = std::variant<std::int64_t, double, std::string>;

std::string to_string(const Value& v);

/// Numeric view of a value; nullopt for strings.
std::optional<double> as_real(const Value& v);

struct CategoricalDomain {
  std::vector<Value> values;
};

struct IntegerDomain {
  std::int64_t lo;
  std::int64_t hi;
};

struct RealDomain {
  double lo;
  double hi;
};

using Domain = std::variant<CategoricalDomain, IntegerDomain, RealDomain>;

enum class Distribution { uniform };

/// One search dimension. Validated at construction, immutable afterwards.
class Dimension {
 public:
  /// Throws std::invalid_argument for empty names, inverted or non-finite
  /// bounds, and empty or duplicated categorical sets.
  Dimension(std::string name, Domain domain, Distribution distribution = Distribution::uniform);

  static Dimension categorical(std::string name, std::vector<Value> values);
  static Dimension integer(std::string name, std::int64_t lo, std::int64_t hi);
  static Dimension real(std::string name, double lo, double hi);

  const std::string& name() const noexcept { return name_; }
  const Domain& domain() const noexcept { return domain_; }
  Distribution distribution() const noexcept { return distribution_; }

  bool is_categorical() const noexcept { return std::holds_alternative<CategoricalDomain>(domain_); }
  bool is_integer() const noexcept { return std::holds_alternative<IntegerDomain>(domain_); }
  bool is_real() const noexcept { return std::holds_alternative<RealDomain>(domain_); }

  /// Membership predicate, including the value's type.
  bool contains(const Value& v) const;

  /// Position of `v` in a categorical set; nullopt when absent or when the
  /// dimension is not categorical.
  std::optional<std::size_t> category_index(const Value& v) const;

 private:
  std::string name_;
  Domain domain_;
  Distribution distribution_;
};

/// |S_i|: the set size for categorical, hi - lo + 1 for integer, nullopt
/// (infinite) for real. An integer interval spanning all 2^64 values
/// saturates at UINT64_MAX.
std::optional<std::uint64_t> cardinality(const Dimension& dim);

struct Candidate {
  std::vector<Value> values;

  std::size_t size() const noexcept { return values.size(); }
  const Value& operator[](std::size_t i) const { return values[i]; }
  Value& operator[](std::size_t i) { return values[i]; }

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Ordered, non-empty list of uniquely named dimensions.
class SearchSpace {
 public:
  /// Throws std::invalid_argument when empty or when names repeat.
  explicit SearchSpace(std::vector<Dimension> dimensions);

  std::size_t size() const noexcept { return dimensions_.size(); }
  const Dimension& operator[](std::size_t i) const { return dimensions_[i]; }
  const std::vector<Dimension>& dimensions() const noexcept { return dimensions_; }

  std::optional<std::size_t> index_of(const std::string& name) const;

  bool contains(const Candidate& c) const;

 private:
  std::vector<Dimension> dimensions_;
};

/// Draws one value from the dimension's law.
Value sample_dimension(const Dimension& dim, RandomStream& rng);

/// Draws every coordinate in dimension order.
Candidate sample_candidate(const SearchSpace& space, RandomStream& rng);

}  // namespace wrs
