#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tdal/error.hpp"
#include "tdal/matrix.hpp"
#include "tdal/rng.hpp"

namespace tdal {

struct ForestConfig {
  std::size_t n_trees = 250;
  std::size_t max_depth = 12;
  std::size_t min_leaf = 2;
  std::size_t features_per_split = 0;  // 0 = ceil(sqrt(d))
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const {
    require(n_trees >= 1, "ForestConfig: n_trees must be positive");
    require(max_depth >= 1, "ForestConfig: max_depth must be positive");
    require(min_leaf >= 1, "ForestConfig: min_leaf must be positive");
  }

  bool operator==(const ForestConfig&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> probs;  // add-1 smoothed class frequencies at leaves

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  std::span<const double> predict(std::span<const double> x) const {
    int at = 0;
    while (!nodes[at].is_leaf())
      at = x[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
    return nodes[at].probs;
  }
};

namespace detail {

struct SplitCandidate {
  double gain = -1.0;
  std::size_t feature = 0;
  double threshold = 0.0;
};

inline double gini(std::span<const std::size_t> counts, std::size_t total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (std::size_t c : counts) {
    const double f = static_cast<double>(c) / static_cast<double>(total);
    g -= f * f;
  }
  return g;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& z, const std::vector<int>& y, std::size_t classes,
              const ForestConfig& cfg, Rng rng)
      : z_(z), y_(y), classes_(classes), cfg_(cfg), rng_(std::move(rng)) {
    mtry_ = cfg.features_per_split
                ? std::min(cfg.features_per_split, z.cols())
                : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(z.cols()))));
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> rows, std::size_t depth) {
    std::vector<std::size_t> counts(classes_, 0);
    for (std::size_t i : rows) ++counts[y_[i]];
    const std::size_t distinct =
        std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });

    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    SplitCandidate best;
    if (distinct > 1 && depth < cfg_.max_depth && rows.size() >= 2 * cfg_.min_leaf)
      best = find_split(rows, counts);

    if (best.gain <= 1e-12) {
      auto& leaf = tree_.nodes[id];
      leaf.probs.resize(classes_);
      for (std::size_t c = 0; c < classes_; ++c)
        leaf.probs[c] = (static_cast<double>(counts[c]) + 1.0) /
                        (static_cast<double>(rows.size()) + static_cast<double>(classes_));
      return id;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t i : rows)
      (z_(i, best.feature) <= best.threshold ? left_rows : right_rows).push_back(i);
    rows.clear();
    rows.shrink_to_fit();

    tree_.nodes[id].feature = static_cast<int>(best.feature);
    tree_.nodes[id].threshold = best.threshold;
    const int left = grow(std::move(left_rows), depth + 1);
    const int right = grow(std::move(right_rows), depth + 1);
    tree_.nodes[id].left = left;
    tree_.nodes[id].right = right;
    return id;
  }

  SplitCandidate find_split(const std::vector<std::size_t>& rows,
                            const std::vector<std::size_t>& counts) {
    auto features = rng_.sample_without_replacement(z_.cols(), mtry_);
    std::sort(features.begin(), features.end());

    const double parent_gini = gini(counts, rows.size());
    const double n = static_cast<double>(rows.size());
    SplitCandidate best;

    std::vector<std::pair<double, int>> vals(rows.size());
    std::vector<std::size_t> left_counts(classes_);
    for (std::size_t f : features) {
      for (std::size_t k = 0; k < rows.size(); ++k)
        vals[k] = {z_(rows[k], f), y_[rows[k]]};
      std::sort(vals.begin(), vals.end());
      std::fill(left_counts.begin(), left_counts.end(), 0);

      std::size_t n_left = 0;
      for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
        ++left_counts[vals[k].second];
        ++n_left;
        if (vals[k + 1].first <= vals[k].first) continue;  // no boundary here
        const std::size_t n_right = rows.size() - n_left;
        if (n_left < cfg_.min_leaf || n_right < cfg_.min_leaf) continue;

        double gl = 1.0, gr = 1.0;
        for (std::size_t c = 0; c < classes_; ++c) {
          const double fl = static_cast<double>(left_counts[c]) / static_cast<double>(n_left);
          const double fr = static_cast<double>(counts[c] - left_counts[c]) /
                            static_cast<double>(n_right);
          gl -= fl * fl;
          gr -= fr * fr;
        }
        const double gain = parent_gini - (static_cast<double>(n_left) * gl +
                                           static_cast<double>(n_right) * gr) /
                                              n;
        const double threshold = 0.5 * (vals[k].first + vals[k + 1].first);
        // strict improvement; ties keep the lowest feature then lowest threshold
        if (gain > best.gain + 1e-15) {
          best = {gain, f, threshold};
        }
      }
    }
    return best;
  }

  const Matrix& z_;
  const std::vector<int>& y_;
  std::size_t classes_;
  ForestConfig cfg_;
  Rng rng_;
  std::size_t mtry_ = 1;
  DecisionTree tree_;
};

}  // namespace detail

/// CART forest; the individual trees are the stochastic-head realisations.
struct RandomForestHead {
  std::vector<DecisionTree> trees;
  std::size_t input_dim = 0;
  std::size_t class_count = 0;
};

inline RandomForestHead fit_forest(const Matrix& z, const std::vector<int>& y,
                                   std::size_t class_count, const ForestConfig& cfg) {
  cfg.validate();
  require(z.rows() >= 1, "fit_forest: empty training set");
  require_dims(z.rows() == y.size(), "fit_forest: label count mismatch");
  require(class_count >= 1, "fit_forest: class_count must be positive");
  for (int label : y)
    require(label >= 0 && static_cast<std::size_t>(label) < class_count,
            "fit_forest: label out of range");

  Rng root(cfg.seed);
  RandomForestHead head;
  head.input_dim = z.cols();
  head.class_count = class_count;
  head.trees.reserve(cfg.n_trees);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    Rng tree_rng = root.stream("tree", t);
    std::vector<std::size_t> rows(z.rows());
    if (cfg.bootstrap) {
      for (auto& r : rows) r = tree_rng.uniform_index(z.rows());
    } else {
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    }
    detail::TreeBuilder builder(z, y, class_count, cfg, tree_rng.stream("splits"));
    head.trees.push_back(builder.build(std::move(rows)));
  }
  return head;
}

}  // namespace tdal
