#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "painbvp/matrix.hpp"
#include "painbvp/rng.hpp"

namespace painbvp::learn {

/// Internal nodes send x[feature] <= threshold to the left child.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  bool is_leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  std::vector<double> values;  // value_dim entries per node
  std::size_t value_dim = 1;

  std::size_t leaf_of(std::span<const double> row) const;
  std::span<const double> value(std::size_t node) const { return {values.data() + node * value_dim, value_dim}; }
  std::span<const double> predict(std::span<const double> row) const { return value(leaf_of(row)); }
  std::size_t depth() const;
};

enum class Criterion { kGini, kVariance };
enum class Splitter { kBest, kRandom };

struct TreeOptions {
  Criterion criterion = Criterion::kGini;
  Splitter splitter = Splitter::kBest;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // 0 = all
};

/// Targets for one tree: class codes in [0, n_classes) or real values.
struct TreeTarget {
  std::span<const int> codes;
  std::size_t n_classes = 0;
  std::span<const double> values;
};

/// CART growth on the rows listed in `sample` (repeats allowed, as in a
/// bootstrap). `weights` is per original row and may be empty for unit
/// weights. Leaves hold normalised class frequencies or the weighted mean.
/// When `importance` is given, each split adds its weighted impurity
/// decrease to its feature's entry.
DecisionTree fit_tree(const Matrix& x, const TreeTarget& target, std::span<const double> weights,
                      std::span<const std::size_t> sample, const TreeOptions& options, Rng& rng,
                      std::vector<double>* importance = nullptr);

}  // namespace painbvp::learn
