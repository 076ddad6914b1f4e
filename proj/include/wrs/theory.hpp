#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wrs/space.hpp"

namespace wrs::theory {

/// Raised when a formula meets a dimension of infinite cardinality.
class DiscreteOnlyError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Cardinalities |S_i|, probabilities of change p_i and distinct-value
/// counts m_i for a discrete search space, dimension 1 first.
class DiscreteProfile {
 public:
  /// Throws std::invalid_argument unless the lengths agree, |S_i| >= 1,
  /// p_i in (0, 1] with p_1 = 1, and 1 <= m_i <= |S_i|.
  DiscreteProfile(std::vector<std::uint64_t> cards, std::vector<double> probs,
                  std::vector<std::uint64_t> distinct);

  /// Cardinalities taken from `space`; throws DiscreteOnlyError for real
  /// dimensions.
  static DiscreteProfile from_space(const SearchSpace& space, std::vector<double> probs,
                                    std::vector<std::uint64_t> distinct);

  std::size_t size() const noexcept { return cards_.size(); }
  const std::vector<std::uint64_t>& cards() const noexcept { return cards_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const std::vector<std::uint64_t>& distinct() const noexcept { return distinct_; }

 private:
  std::vector<std::uint64_t> cards_;
  std::vector<double> probs_;
  std::vector<std::uint64_t> distinct_;
};

/// Finite cardinalities of every dimension; throws DiscreteOnlyError on a
/// real interval.
std::vector<std::uint64_t> finite_cardinalities(const SearchSpace& space);

/// Per-step probability that RS hits the optimum: prod 1/|S_i|.
double p_rs(const DiscreteProfile& profile);

/// Per-step probability that WRS hits the optimum:
/// 1/|S_1| * prod_{i>=2} (p_i/|S_i| + (1 - p_i)/(|S_i| - m_i + 1)).
double p_wrs(const DiscreteProfile& profile);

/// 1 - (1 - p)^n. Throws std::invalid_argument for p outside [0, 1] or n == 0.
double p_after_n(double p, std::uint64_t n);

/// Expected distinct values after n steps under uniform sampling with
/// change probability p: |S| * (1 - ((|S| - 1)/|S|)^(n p)), real exponent.
double expected_distinct(std::uint64_t card, double n, double p);

/// m_i >= 2 for every i >= 2, the sufficient condition for p_wrs >= p_rs.
bool dominance_holds(const DiscreteProfile& profile);

}  // namespace wrs::theory
