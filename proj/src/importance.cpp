#include "wrs/importance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wrs {

namespace {

using Node = RegressionTree::Node;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t category_count(const Dimension& dim) {
  if (const auto* c = std::get_if<CategoricalDomain>(&dim.domain())) return c->values.size();
  return 0;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  std::vector<std::uint8_t> goes_left;
  double score = -kInf;  // sumL^2/nL + sumR^2/nR
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
              const std::vector<std::size_t>& n_categories, std::vector<std::size_t> scan_order,
              const ForestSettings& settings)
      : x_(x), y_(y), n_categories_(n_categories), scan_order_(std::move(scan_order)),
        settings_(settings) {}

  RegressionTree build(std::vector<std::size_t> samples) {
    nodes_.clear();
    grow(samples, 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  int grow(std::vector<std::size_t>& samples, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    double sum = 0.0;
    for (auto s : samples) sum += y_[s];
    const double n = static_cast<double>(samples.size());
    const double mean = sum / n;
    double sse = 0.0;
    for (auto s : samples) sse += (y_[s] - mean) * (y_[s] - mean);

    nodes_[id].value = mean;
    nodes_[id].n_samples = samples.size();

    const bool depth_ok = settings_.max_depth == 0 || depth < settings_.max_depth;
    if (!depth_ok || samples.size() < 2 * settings_.min_samples_leaf || sse <= 0.0) return id;

    Split best;
    for (const std::size_t f : scan_order_) {
      if (n_categories_[f] == 0)
        scan_numeric(f, samples, best);
      else
        scan_categorical(f, samples, best);
    }
    const double gain = best.score - sum * sum / n;
    if (best.feature < 0 || !(gain > 1e-12 * sse)) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto s : samples) {
      const double v = x_[s][best.feature];
      const bool go_left = best.goes_left.empty()
                               ? v <= best.threshold
                               : best.goes_left[static_cast<std::size_t>(v)] != 0;
      (go_left ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    nodes_[id].goes_left = std::move(best.goes_left);
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void scan_numeric(std::size_t f, const std::vector<std::size_t>& samples, Split& best) const {
    std::vector<std::pair<double, double>> xy;
    xy.reserve(samples.size());
    for (auto s : samples) xy.emplace_back(x_[s][f], y_[s]);
    std::sort(xy.begin(), xy.end());

    const std::size_t n = xy.size();
    const std::size_t min_leaf = settings_.min_samples_leaf;
    double total = 0.0;
    for (const auto& p : xy) total += p.second;

    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += xy[i].second;
      const std::size_t nl = i + 1;
      if (nl < min_leaf || n - nl < min_leaf) continue;
      if (!(xy[i].first < xy[i + 1].first)) continue;
      const double right_sum = total - left_sum;
      const double score = left_sum * left_sum / static_cast<double>(nl) +
                           right_sum * right_sum / static_cast<double>(n - nl);
      if (score > best.score) {
        const double lo = xy[i].first;
        const double hi = xy[i + 1].first;
        double t = lo + (hi - lo) / 2.0;
        if (!(t >= lo && t < hi)) t = lo;
        best.feature = static_cast<int>(f);
        best.threshold = t;
        best.goes_left.clear();
        best.score = score;
      }
    }
  }

  void scan_categorical(std::size_t f, const std::vector<std::size_t>& samples,
                        Split& best) const {
    const std::size_t k = n_categories_[f];
    std::vector<double> sums(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (auto s : samples) {
      const auto c = static_cast<std::size_t>(x_[s][f]);
      sums[c] += y_[s];
      ++counts[c];
    }
    // Ordering categories by mean response makes the best prefix split the
    // best binary partition for squared error.
    std::vector<std::size_t> present;
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0) present.push_back(c);
    if (present.size() < 2) return;
    std::sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) {
      const double ma = sums[a] / static_cast<double>(counts[a]);
      const double mb = sums[b] / static_cast<double>(counts[b]);
      return ma < mb || (ma == mb && a < b);
    });

    const std::size_t n = samples.size();
    double total = 0.0;
    for (auto c : present) total += sums[c];
    double left_sum = 0.0;
    std::size_t nl = 0;
    for (std::size_t p = 0; p + 1 < present.size(); ++p) {
      left_sum += sums[present[p]];
      nl += counts[present[p]];
      if (nl < settings_.min_samples_leaf || n - nl < settings_.min_samples_leaf) continue;
      const double right_sum = total - left_sum;
      const double score = left_sum * left_sum / static_cast<double>(nl) +
                           right_sum * right_sum / static_cast<double>(n - nl);
      if (score > best.score) {
        std::vector<std::uint8_t> goes_left(k, 0);
        for (std::size_t q = 0; q <= p; ++q) goes_left[present[q]] = 1;
        // Categories unseen at this node follow the larger child.
        const bool absent_left = nl >= n - nl;
        for (std::size_t c = 0; c < k; ++c)
          if (counts[c] == 0) goes_left[c] = absent_left ? 1 : 0;
        best.feature = static_cast<int>(f);
        best.threshold = 0.0;
        best.goes_left = std::move(goes_left);
        best.score = score;
      }
    }
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<double>& y_;
  const std::vector<std::size_t>& n_categories_;
  std::vector<std::size_t> scan_order_;  // by dimension name; ties go to the first
  const ForestSettings& settings_;
  std::vector<Node> nodes_;
};

/// Uniform-law measure of the numeric cell (a, b] within the dimension.
double interval_measure(const Dimension& dim, double a, double b) {
  if (const auto* r = std::get_if<IntegerDomain>(&dim.domain())) {
    const double lo = static_cast<double>(r->lo);
    const double hi = static_cast<double>(r->hi);
    const double first = std::max(std::isinf(a) ? lo : std::floor(a) + 1.0, lo);
    const double last = std::min(std::isinf(b) ? hi : std::floor(b), hi);
    const double count = std::max(0.0, last - first + 1.0);
    return count / (hi - lo + 1.0);
  }
  const auto& r = std::get<RealDomain>(dim.domain());
  if (r.hi > r.lo) return std::max(0.0, std::min(b, r.hi) - std::max(a, r.lo)) / (r.hi - r.lo);
  return (a < r.lo && r.lo <= b) ? 1.0 : 0.0;
}

struct Box {
  std::vector<double> lower;  // numeric: open lower end
  std::vector<double> upper;  // numeric: closed upper end
  std::vector<std::vector<std::uint8_t>> allowed;  // categorical
};

struct Leaf {
  double value;
  Box box;
  std::vector<double> measure;  // per dimension
};

void collect_leaves(const RegressionTree& tree, int id, Box& box, const SearchSpace& space,
                    std::vector<Leaf>& out) {
  const Node& node = tree.nodes()[static_cast<std::size_t>(id)];
  if (node.is_leaf()) {
    Leaf leaf{node.value, box, std::vector<double>(space.size(), 0.0)};
    for (std::size_t j = 0; j < space.size(); ++j) {
      if (space[j].is_categorical()) {
        const auto& a = box.allowed[j];
        leaf.measure[j] = static_cast<double>(std::count(a.begin(), a.end(), 1)) /
                          static_cast<double>(a.size());
      } else {
        leaf.measure[j] = interval_measure(space[j], box.lower[j], box.upper[j]);
      }
    }
    out.push_back(std::move(leaf));
    return;
  }
  const auto f = static_cast<std::size_t>(node.feature);
  if (node.goes_left.empty()) {
    const double saved = box.upper[f];
    box.upper[f] = std::min(saved, node.threshold);
    collect_leaves(tree, node.left, box, space, out);
    box.upper[f] = saved;
    const double saved_lo = box.lower[f];
    box.lower[f] = std::max(saved_lo, node.threshold);
    collect_leaves(tree, node.right, box, space, out);
    box.lower[f] = saved_lo;
  } else {
    const auto saved = box.allowed[f];
    for (std::size_t c = 0; c < saved.size(); ++c) box.allowed[f][c] = saved[c] & node.goes_left[c];
    collect_leaves(tree, node.left, box, space, out);
    for (std::size_t c = 0; c < saved.size(); ++c)
      box.allowed[f][c] = saved[c] & static_cast<std::uint8_t>(!node.goes_left[c]);
    collect_leaves(tree, node.right, box, space, out);
    box.allowed[f] = saved;
  }
}

double product_except(const std::vector<double>& m, std::size_t skip) {
  double p = 1.0;
  for (std::size_t j = 0; j < m.size(); ++j)
    if (j != skip) p *= m[j];
  return p;
}

/// Variance of the marginal prediction along dimension i.
double marginal_variance(const std::vector<Leaf>& leaves, const RegressionTree& tree,
                         const SearchSpace& space, std::size_t i) {
  std::vector<double> cell_measure;
  std::vector<double> cell_value;

  if (space[i].is_categorical()) {
    const std::size_t k = category_count(space[i]);
    cell_measure.assign(k, 1.0 / static_cast<double>(k));
    cell_value.assign(k, 0.0);
    for (const auto& leaf : leaves) {
      const double rest = leaf.value * product_except(leaf.measure, i);
      if (rest == 0.0) continue;
      for (std::size_t c = 0; c < k; ++c)
        if (leaf.box.allowed[i][c]) cell_value[c] += rest;
    }
  } else {
    std::vector<double> cuts;
    for (const auto& node : tree.nodes())
      if (node.feature == static_cast<int>(i)) cuts.push_back(node.threshold);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    // Cell c spans (edges[c], edges[c + 1]].
    std::vector<double> edges;
    edges.reserve(cuts.size() + 2);
    edges.push_back(-kInf);
    edges.insert(edges.end(), cuts.begin(), cuts.end());
    edges.push_back(kInf);
    const std::size_t cells = edges.size() - 1;
    cell_measure.resize(cells);
    cell_value.assign(cells, 0.0);
    for (std::size_t c = 0; c < cells; ++c)
      cell_measure[c] = interval_measure(space[i], edges[c], edges[c + 1]);
    for (const auto& leaf : leaves) {
      const double rest = leaf.value * product_except(leaf.measure, i);
      if (rest == 0.0) continue;
      const auto first = static_cast<std::size_t>(
          std::lower_bound(edges.begin(), edges.end(), leaf.box.lower[i]) - edges.begin());
      const auto last = static_cast<std::size_t>(
          std::lower_bound(edges.begin(), edges.end(), leaf.box.upper[i]) - edges.begin());
      for (std::size_t c = first; c < last; ++c) cell_value[c] += rest;
    }
  }

  double mass = 0.0;
  double mean = 0.0;
  for (std::size_t c = 0; c < cell_value.size(); ++c) {
    mass += cell_measure[c];
    mean += cell_measure[c] * cell_value[c];
  }
  if (mass <= 0.0) return 0.0;
  mean /= mass;
  double var = 0.0;
  for (std::size_t c = 0; c < cell_value.size(); ++c)
    var += cell_measure[c] * (cell_value[c] - mean) * (cell_value[c] - mean);
  return var / mass;
}

}  // namespace

double RegressionTree::predict(std::span<const double> features) const {
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const Node& n = nodes_[id];
    const double v = features[static_cast<std::size_t>(n.feature)];
    const bool left =
        n.goes_left.empty() ? v <= n.threshold : n.goes_left[static_cast<std::size_t>(v)] != 0;
    id = static_cast<std::size_t>(left ? n.left : n.right);
  }
  return nodes_[id].value;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  // Children always follow their parent in the node array.
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    deepest = std::max(deepest, d[id]);
    if (!nodes_[id].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[id].left)] = d[id] + 1;
      d[static_cast<std::size_t>(nodes_[id].right)] = d[id] + 1;
    }
  }
  return deepest;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::vector<double> encode_features(const SearchSpace& space, const Candidate& x) {
  std::vector<double> f(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) {
    if (space[j].is_categorical()) {
      auto idx = space[j].category_index(x[j]);
      if (!idx)
        throw std::invalid_argument("value " + to_string(x[j]) + " is not in dimension '" +
                                    space[j].name() + "'");
      f[j] = static_cast<double>(*idx);
    } else {
      auto r = as_real(x[j]);
      if (!r) throw std::invalid_argument("non-numeric value in dimension '" + space[j].name() + "'");
      f[j] = *r;
    }
  }
  return f;
}

double TreeEnsemble::predict(const Candidate& x) const {
  const auto f = encode_features(space_, x);
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(f);
  return sum / static_cast<double>(trees_.size());
}

TreeEnsemble fit_ensemble(const SearchSpace& space, std::span<const Candidate> candidates,
                          std::span<const double> values, const ForestSettings& settings,
                          RandomStream& rng) {
  if (candidates.size() != values.size())
    throw std::invalid_argument("candidates and values differ in length");
  if (settings.n_trees == 0) throw std::invalid_argument("ensemble needs at least one tree");
  if (settings.min_samples_leaf == 0) throw std::invalid_argument("min_samples_leaf must be >= 1");
  if (values.size() < kMinImportanceSamples)
    throw ImportanceError(ImportanceError::Kind::insufficient_data,
                          "need at least " + std::to_string(kMinImportanceSamples) +
                              " successful trials, have " + std::to_string(values.size()));
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi)
    throw ImportanceError(ImportanceError::Kind::constant_objective,
                          "objective is constant over the sampled trials");

  std::vector<std::vector<double>> x;
  x.reserve(candidates.size());
  for (const auto& c : candidates) x.push_back(encode_features(space, c));
  const std::vector<double> y(values.begin(), values.end());
  std::vector<std::size_t> n_categories(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) n_categories[j] = category_count(space[j]);

  const std::uint64_t base = rng.next_u64();
  const std::size_t n = y.size();
  std::vector<std::size_t> order(space.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return space[a].name() < space[b].name(); });
  TreeBuilder builder(x, y, n_categories, std::move(order), settings);
  std::vector<RegressionTree> trees;
  trees.reserve(settings.n_trees);
  for (std::size_t t = 0; t < settings.n_trees; ++t) {
    RandomStream tree_rng(derive_seed(base, t));
    std::vector<std::size_t> samples(n);
    if (settings.bootstrap) {
      for (auto& s : samples) s = static_cast<std::size_t>(tree_rng.uniform_below(n));
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    trees.push_back(builder.build(std::move(samples)));
  }
  return TreeEnsemble(space, std::move(trees), n);
}

TreeEnsemble fit_ensemble(const RunHistory& history, const ForestSettings& settings,
                          RandomStream& rng) {
  std::vector<Candidate> candidates;
  std::vector<double> values;
  for (const auto& t : history.trials) {
    if (t.failed()) continue;
    candidates.push_back(t.candidate);
    values.push_back(*t.value);
  }
  return fit_ensemble(history.space, candidates, values, settings, rng);
}

WeightReport main_effect_weights(const TreeEnsemble& ensemble, const SearchSpace& space) {
  if (ensemble.space().size() != space.size())
    throw std::invalid_argument("ensemble was fit on a different space");
  const std::size_t d = space.size();

  WeightReport report;
  report.weights.assign(d, 0.0);
  report.n_samples = ensemble.n_samples();
  report.n_trees = ensemble.trees().size();
  report.min_depth = std::numeric_limits<std::size_t>::max();

  std::size_t used = 0;
  double leaves_total = 0.0;
  for (const auto& tree : ensemble.trees()) {
    report.min_depth = std::min(report.min_depth, tree.depth());
    report.max_depth = std::max(report.max_depth, tree.depth());
    leaves_total += static_cast<double>(tree.leaf_count());

    Box box;
    box.lower.assign(d, -kInf);
    box.upper.assign(d, kInf);
    box.allowed.resize(d);
    for (std::size_t j = 0; j < d; ++j)
      box.allowed[j].assign(category_count(space[j]), 1);
    std::vector<Leaf> leaves;
    collect_leaves(tree, 0, box, space, leaves);

    double mass = 0.0;
    double mean = 0.0;
    double second = 0.0;
    std::vector<double> masses(leaves.size());
    for (std::size_t l = 0; l < leaves.size(); ++l) {
      double m = 1.0;
      for (double v : leaves[l].measure) m *= v;
      masses[l] = m;
      mass += m;
      mean += m * leaves[l].value;
      second += m * leaves[l].value * leaves[l].value;
    }
    if (mass <= 0.0) continue;
    mean /= mass;
    double total = 0.0;
    for (std::size_t l = 0; l < leaves.size(); ++l)
      total += masses[l] * (leaves[l].value - mean) * (leaves[l].value - mean);
    total /= mass;
    if (!(total > 1e-24 * (second / mass))) continue;

    for (std::size_t i = 0; i < d; ++i) {
      const double vi = marginal_variance(leaves, tree, space, i);
      report.weights[i] += std::clamp(vi / total, 0.0, 1.0);
    }
    ++used;
  }
  if (report.n_trees == 0) report.min_depth = 0;
  report.mean_leaves = report.n_trees ? leaves_total / static_cast<double>(report.n_trees) : 0.0;
  if (used == 0)
    throw ImportanceError(ImportanceError::Kind::constant_model,
                          "every tree in the ensemble is constant");
  for (auto& w : report.weights) w = 100.0 * w / static_cast<double>(used);
  return report;
}

}  // namespace wrs
