#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "wrs/history.hpp"
#include "wrs/rng.hpp"
#include "wrs/space.hpp"

namespace wrs {

class ImportanceError : public std::runtime_error {
 public:
  enum class Kind { insufficient_data, constant_objective, constant_model, invalid_weights };

  ImportanceError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct ForestSettings {
  std::size_t n_trees = 32;
  std::size_t min_samples_leaf = 2;
  std::size_t max_depth = 0;  // 0: unlimited
  bool bootstrap = true;
};

/// Fewest successful trials accepted for fitting.
inline constexpr std::size_t kMinImportanceSamples = 10;

/// CART regression tree over encoded candidates. Numeric features split on
/// `x <= threshold`; categorical features split on set membership (features
/// hold the category index).
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::vector<std::uint8_t> goes_left;  // categorical: per category index
    int left = -1;
    int right = -1;
    double value = 0.0;
    std::size_t n_samples = 0;

    bool is_leaf() const noexcept { return feature < 0; }

    friend bool operator==(const Node&, const Node&) = default;
  };

  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> features) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<Node> nodes_;
};

/// Bagged regression-tree ensemble fit on (candidate -> value) pairs.
class TreeEnsemble {
 public:
  TreeEnsemble(SearchSpace space, std::vector<RegressionTree> trees, std::size_t n_samples)
      : space_(std::move(space)), trees_(std::move(trees)), n_samples_(n_samples) {}

  double predict(const Candidate& x) const;

  const SearchSpace& space() const noexcept { return space_; }
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  std::size_t n_samples() const noexcept { return n_samples_; }

  friend bool operator==(const TreeEnsemble& a, const TreeEnsemble& b) {
    return a.trees_ == b.trees_ && a.n_samples_ == b.n_samples_;
  }

 private:
  SearchSpace space_;
  std::vector<RegressionTree> trees_;
  std::size_t n_samples_;
};

/// Feature encoding used by the trees: numeric values as doubles,
/// categorical values as their index in the set.
std::vector<double> encode_features(const SearchSpace& space, const Candidate& x);

/// Fits the ensemble. Throws ImportanceError when fewer than
/// kMinImportanceSamples points are given or all values are equal.
TreeEnsemble fit_ensemble(const SearchSpace& space, std::span<const Candidate> candidates,
                          std::span<const double> values, const ForestSettings& settings,
                          RandomStream& rng);

/// Fits on every successful trial of `history`.
TreeEnsemble fit_ensemble(const RunHistory& history, const ForestSettings& settings,
                          RandomStream& rng);

/// Single-dimension functional-ANOVA main effects of the ensemble under the
/// uniform law on `space`, in percent of total prediction variance.
///
/// Each tree's leaves partition the domain into boxes; marginals are
/// integrated exactly over those boxes. The per-tree fractions V_i / V are
/// averaged over the trees with non-zero variance. Throws ImportanceError
/// when every tree is constant.
WeightReport main_effect_weights(const TreeEnsemble& ensemble, const SearchSpace& space);

}  // namespace wrs
