#include "wrs/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace wrs {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string to_string(const Value& v) {
  return std::visit(overloaded{
                        [](std::int64_t i) { return std::to_string(i); },
                        [](double d) {
                          std::ostringstream os;
                          os.precision(17);
                          os << d;
                          return os.str();
                        },
                        [](const std::string& s) { return s; },
                    },
                    v);
}

std::optional<double> as_real(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

Dimension::Dimension(std::string name, Domain domain, Distribution distribution)
    : name_(std::move(name)), domain_(std::move(domain)), distribution_(distribution) {
  if (name_.empty()) throw std::invalid_argument("dimension name must not be empty");
  std::visit(overloaded{
                 [&](const CategoricalDomain& c) {
                   if (c.values.empty())
                     throw std::invalid_argument("categorical dimension '" + name_ +
                                                 "' has no values");
                   for (std::size_t i = 0; i < c.values.size(); ++i) {
                     if (const auto* d = std::get_if<double>(&c.values[i]); d && !std::isfinite(*d))
                       throw std::invalid_argument("categorical dimension '" + name_ +
                                                   "' has a non-finite value");
                     for (std::size_t j = 0; j < i; ++j)
                       if (c.values[i] == c.values[j])
                         throw std::invalid_argument("categorical dimension '" + name_ +
                                                     "' repeats value " + to_string(c.values[i]));
                   }
                 },
                 [&](const IntegerDomain& r) {
                   if (r.lo > r.hi)
                     throw std::invalid_argument("integer dimension '" + name_ + "' has lo > hi");
                 },
                 [&](const RealDomain& r) {
                   if (!std::isfinite(r.lo) || !std::isfinite(r.hi))
                     throw std::invalid_argument("real dimension '" + name_ +
                                                 "' needs finite bounds");
                   if (r.lo > r.hi)
                     throw std::invalid_argument("real dimension '" + name_ + "' has lo > hi");
                 },
             },
             domain_);
}

Dimension Dimension::categorical(std::string name, std::vector<Value> values) {
  return Dimension(std::move(name), CategoricalDomain{std::move(values)});
}

Dimension Dimension::integer(std::string name, std::int64_t lo, std::int64_t hi) {
  return Dimension(std::move(name), IntegerDomain{lo, hi});
}

Dimension Dimension::real(std::string name, double lo, double hi) {
  return Dimension(std::move(name), RealDomain{lo, hi});
}

bool Dimension::contains(const Value& v) const {
  return std::visit(overloaded{
                        [&](const CategoricalDomain& c) {
                          return std::find(c.values.begin(), c.values.end(), v) != c.values.end();
                        },
                        [&](const IntegerDomain& r) {
                          const auto* i = std::get_if<std::int64_t>(&v);
                          return i != nullptr && *i >= r.lo && *i <= r.hi;
                        },
                        [&](const RealDomain& r) {
                          const auto* d = std::get_if<double>(&v);
                          return d != nullptr && *d >= r.lo && *d <= r.hi;
                        },
                    },
                    domain_);
}

std::optional<std::size_t> Dimension::category_index(const Value& v) const {
  const auto* c = std::get_if<CategoricalDomain>(&domain_);
  if (c == nullptr) return std::nullopt;
  auto it = std::find(c->values.begin(), c->values.end(), v);
  if (it == c->values.end()) return std::nullopt;
  return static_cast<std::size_t>(it - c->values.begin());
}

std::optional<std::uint64_t> cardinality(const Dimension& dim) {
  return std::visit(overloaded{
                        [](const CategoricalDomain& c) -> std::optional<std::uint64_t> {
                          return c.values.size();
                        },
                        [](const IntegerDomain& r) -> std::optional<std::uint64_t> {
                          const std::uint64_t span = static_cast<std::uint64_t>(r.hi) -
                                                     static_cast<std::uint64_t>(r.lo);
                          if (span == std::numeric_limits<std::uint64_t>::max()) return span;
                          return span + 1;
                        },
                        [](const RealDomain&) -> std::optional<std::uint64_t> {
                          return std::nullopt;
                        },
                    },
                    dim.domain());
}

SearchSpace::SearchSpace(std::vector<Dimension> dimensions) : dimensions_(std::move(dimensions)) {
  if (dimensions_.empty()) throw std::invalid_argument("search space needs at least one dimension");
  std::unordered_set<std::string> seen;
  for (const auto& d : dimensions_)
    if (!seen.insert(d.name()).second)
      throw std::invalid_argument("duplicate dimension name '" + d.name() + "'");
}

std::optional<std::size_t> SearchSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < dimensions_.size(); ++i)
    if (dimensions_[i].name() == name) return i;
  return std::nullopt;
}

bool SearchSpace::contains(const Candidate& c) const {
  if (c.size() != dimensions_.size()) return false;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!dimensions_[i].contains(c[i])) return false;
  return true;
}

Value sample_dimension(const Dimension& dim, RandomStream& rng) {
  return std::visit(overloaded{
                        [&](const CategoricalDomain& c) -> Value {
                          return c.values[rng.uniform_below(c.values.size())];
                        },
                        [&](const IntegerDomain& r) -> Value {
                          // span + 1 wraps to 0 for the full range, which
                          // uniform_below treats as "all 64 bits".
                          const std::uint64_t span = static_cast<std::uint64_t>(r.hi) -
                                                     static_cast<std::uint64_t>(r.lo) + 1;
                          return static_cast<std::int64_t>(static_cast<std::uint64_t>(r.lo) +
                                                           rng.uniform_below(span));
                        },
                        [&](const RealDomain& r) -> Value {
                          const double x = r.lo + (r.hi - r.lo) * rng.uniform01();
                          return std::clamp(x, r.lo, r.hi);
                        },
                    },
                    dim.domain());
}

Candidate sample_candidate(const SearchSpace& space, RandomStream& rng) {
  Candidate c;
  c.values.reserve(space.size());
  for (const auto& d : space.dimensions()) c.values.push_back(sample_dimension(d, rng));
  return c;
}

}  // namespace wrs
