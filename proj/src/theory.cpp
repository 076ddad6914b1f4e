#include "wrs/theory.hpp"

#include <cmath>
#include <string>

namespace wrs::theory {

namespace {

// Above this many factors the products are accumulated as log-sums.
constexpr std::size_t kLogSpaceThreshold = 50;

}  // namespace

DiscreteProfile::DiscreteProfile(std::vector<std::uint64_t> cards, std::vector<double> probs,
                                 std::vector<std::uint64_t> distinct)
    : cards_(std::move(cards)), probs_(std::move(probs)), distinct_(std::move(distinct)) {
  if (cards_.empty()) throw std::invalid_argument("profile needs at least one dimension");
  if (probs_.size() != cards_.size() || distinct_.size() != cards_.size())
    throw std::invalid_argument("profile vectors differ in length");
  if (probs_[0] != 1.0) throw std::invalid_argument("the first dimension must have p = 1");
  for (std::size_t i = 0; i < cards_.size(); ++i) {
    if (cards_[i] < 1) throw std::invalid_argument("cardinalities must be >= 1");
    if (!(probs_[i] > 0.0 && probs_[i] <= 1.0))
      throw std::invalid_argument("probabilities must lie in (0, 1]");
    if (distinct_[i] < 1 || distinct_[i] > cards_[i])
      throw std::invalid_argument("distinct count m_" + std::to_string(i + 1) +
                                  " must lie in [1, |S_i|]");
  }
}

std::vector<std::uint64_t> finite_cardinalities(const SearchSpace& space) {
  std::vector<std::uint64_t> cards;
  cards.reserve(space.size());
  for (const auto& d : space.dimensions()) {
    auto c = cardinality(d);
    if (!c)
      throw DiscreteOnlyError("dimension '" + d.name() +
                              "' is a real interval; the convergence formulas are discrete-only");
    cards.push_back(*c);
  }
  return cards;
}

DiscreteProfile DiscreteProfile::from_space(const SearchSpace& space, std::vector<double> probs,
                                            std::vector<std::uint64_t> distinct) {
  return DiscreteProfile(finite_cardinalities(space), std::move(probs), std::move(distinct));
}

namespace {

// p_wrs equals p_rs bit for bit when every factor collapses to 1/|S_i|.
template <class Factor>
double product(std::size_t d, Factor factor) {
  if (d > kLogSpaceThreshold) {
    double log_p = 0.0;
    for (std::size_t i = 0; i < d; ++i) log_p += std::log(factor(i));
    return std::exp(log_p);
  }
  double p = 1.0;
  for (std::size_t i = 0; i < d; ++i) p *= factor(i);
  return p;
}

}  // namespace

double p_rs(const DiscreteProfile& profile) {
  const auto& cards = profile.cards();
  return product(cards.size(), [&](std::size_t i) { return 1.0 / static_cast<double>(cards[i]); });
}

double p_wrs(const DiscreteProfile& profile) {
  const auto& cards = profile.cards();
  const auto& probs = profile.probs();
  const auto& m = profile.distinct();
  return product(cards.size(), [&](std::size_t i) {
    const double s = static_cast<double>(cards[i]);
    if (i == 0 || probs[i] == 1.0 || m[i] == 1) return 1.0 / s;
    const double remaining = static_cast<double>(cards[i] - m[i] + 1);
    return probs[i] / s + (1.0 - probs[i]) / remaining;
  });
}

double p_after_n(double p, std::uint64_t n) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (p == 1.0) return 1.0;
  return -std::expm1(static_cast<double>(n) * std::log1p(-p));
}

double expected_distinct(std::uint64_t card, double n, double p) {
  if (card < 1) throw std::invalid_argument("cardinality must be >= 1");
  if (!(n >= 0.0)) throw std::invalid_argument("n must be >= 0");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
  const double s = static_cast<double>(card);
  const double np = n * p;
  if (card == 1) return np > 0.0 ? 1.0 : 0.0;
  return s * -std::expm1(np * std::log1p(-1.0 / s));
}

bool dominance_holds(const DiscreteProfile& profile) {
  const auto& m = profile.distinct();
  for (std::size_t i = 1; i < m.size(); ++i)
    if (m[i] < 2) return false;
  return true;
}

}  // namespace wrs::theory
