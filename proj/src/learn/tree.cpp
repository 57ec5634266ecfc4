#include "painbvp/learn/tree.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "painbvp/error.hpp"

namespace painbvp::learn {

std::size_t DecisionTree::leaf_of(std::span<const double> row) const {
  std::size_t node = 0;
  while (!nodes[node].is_leaf()) {
    const TreeNode& n = nodes[node];
    node = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return node;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Running weighted impurity (times total weight) for one side of a split.
class Accumulator {
 public:
  explicit Accumulator(const TreeTarget& t) : target_(&t), counts_(t.n_classes, 0.0) {}

  void reset() {
    std::fill(counts_.begin(), counts_.end(), 0.0);
    weight_ = sum_ = sumsq_ = 0.0;
    n_ = 0;
  }

  void add(std::size_t row, double w) {
    ++n_;
    weight_ += w;
    if (!counts_.empty()) {
      double& c = counts_[static_cast<std::size_t>(target_->codes[row])];
      sumsq_ += (2.0 * c + w) * w;
      c += w;
    } else {
      const double y = target_->values[row];
      sum_ += w * y;
      sumsq_ += w * y * y;
    }
  }

  void remove(std::size_t row, double w) {
    --n_;
    weight_ -= w;
    if (!counts_.empty()) {
      double& c = counts_[static_cast<std::size_t>(target_->codes[row])];
      sumsq_ -= (2.0 * c - w) * w;
      c -= w;
    } else {
      const double y = target_->values[row];
      sum_ -= w * y;
      sumsq_ -= w * y * y;
    }
  }

  /// Total weight times node impurity (Gini or variance).
  double weighted_impurity() const {
    if (weight_ <= 0.0) return 0.0;
    const double v = counts_.empty() ? sumsq_ - sum_ * sum_ / weight_ : weight_ - sumsq_ / weight_;
    return std::max(v, 0.0);
  }

  std::size_t count() const noexcept { return n_; }
  double weight() const noexcept { return weight_; }

  void write_value(std::span<double> out) const {
    if (!counts_.empty()) {
      for (std::size_t k = 0; k < counts_.size(); ++k) {
        out[k] = weight_ > 0.0 ? counts_[k] / weight_ : 1.0 / static_cast<double>(counts_.size());
      }
    } else {
      out[0] = weight_ > 0.0 ? sum_ / weight_ : 0.0;
    }
  }

 private:
  const TreeTarget* target_;
  std::vector<double> counts_;
  double weight_ = 0.0;
  double sum_ = 0.0;
  double sumsq_ = 0.0;
  std::size_t n_ = 0;
};

struct Frame {
  std::size_t node;
  std::size_t begin;
  std::size_t end;
  std::size_t depth;
};

}  // namespace

DecisionTree fit_tree(const Matrix& x, const TreeTarget& target, std::span<const double> weights,
                      std::span<const std::size_t> sample, const TreeOptions& options, Rng& rng,
                      std::vector<double>* importance) {
  if (sample.empty()) throw Error(ErrorCode::kInvalidInput, "tree sample is empty");
  const bool classify = options.criterion == Criterion::kGini;
  if (classify && target.n_classes == 0) throw Error(ErrorCode::kInvalidInput, "classification tree needs classes");
  const std::size_t d = x.cols();
  const std::size_t min_leaf = std::max<std::size_t>(1, options.min_samples_leaf);
  const std::size_t mtry = options.max_features == 0 ? d : std::min(options.max_features, d);
  auto weight_of = [&](std::size_t row) { return weights.empty() ? 1.0 : weights[row]; };

  DecisionTree tree;
  tree.value_dim = classify ? target.n_classes : 1;
  std::vector<std::size_t> idx(sample.begin(), sample.end());
  std::vector<std::size_t> features(d);
  std::iota(features.begin(), features.end(), 0);
  std::vector<std::pair<double, std::size_t>> sorted;
  Accumulator all(target), left(target), right(target);

  tree.nodes.emplace_back();
  tree.values.resize(tree.value_dim);
  std::vector<Frame> stack{{0, 0, idx.size(), 0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    all.reset();
    for (std::size_t i = f.begin; i < f.end; ++i) all.add(idx[i], weight_of(idx[i]));
    all.write_value({tree.values.data() + f.node * tree.value_dim, tree.value_dim});
    const double node_imp = all.weighted_impurity();
    const std::size_t m = f.end - f.begin;
    const bool can_split = (options.max_depth == 0 || f.depth < options.max_depth) && m >= 2 * min_leaf &&
                           node_imp > 1e-14 * std::max(all.weight(), 1e-300);
    if (!can_split) continue;

    // Partial Fisher-Yates draw of the candidate features.
    if (mtry < d) {
      std::iota(features.begin(), features.end(), 0);
      for (std::size_t i = 0; i < mtry; ++i) std::swap(features[i], features[i + rng.index(d - i)]);
      std::sort(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(mtry));
    }

    Split best;
    for (std::size_t fi = 0; fi < mtry; ++fi) {
      const std::size_t feat = features[fi];
      if (options.splitter == Splitter::kBest) {
        sorted.clear();
        for (std::size_t i = f.begin; i < f.end; ++i) sorted.emplace_back(x(idx[i], feat), idx[i]);
        std::sort(sorted.begin(), sorted.end());
        if (sorted.front().first == sorted.back().first) continue;
        left.reset();
        right = all;
        for (std::size_t i = 0; i + 1 < m; ++i) {
          const double w = weight_of(sorted[i].second);
          left.add(sorted[i].second, w);
          right.remove(sorted[i].second, w);
          if (sorted[i + 1].first == sorted[i].first) continue;
          if (left.count() < min_leaf || right.count() < min_leaf) continue;
          const double gain = node_imp - left.weighted_impurity() - right.weighted_impurity();
          if (gain > best.gain) {
            // Midpoint between neighbouring values; falls back to the lower one if rounding reaches the upper.
            double thr = sorted[i].first + (sorted[i + 1].first - sorted[i].first) / 2.0;
            if (!(thr < sorted[i + 1].first)) thr = sorted[i].first;
            best = {static_cast<int>(feat), thr, gain};
          }
        }
      } else {
        double lo = x(idx[f.begin], feat);
        double hi = lo;
        for (std::size_t i = f.begin; i < f.end; ++i) {
          lo = std::min(lo, x(idx[i], feat));
          hi = std::max(hi, x(idx[i], feat));
        }
        if (lo == hi) continue;
        double thr = rng.uniform(lo, hi);
        if (thr >= hi) thr = lo;
        left.reset();
        right.reset();
        for (std::size_t i = f.begin; i < f.end; ++i) {
          const std::size_t r = idx[i];
          (x(r, feat) <= thr ? left : right).add(r, weight_of(r));
        }
        if (left.count() < min_leaf || right.count() < min_leaf) continue;
        const double gain = node_imp - left.weighted_impurity() - right.weighted_impurity();
        if (gain > best.gain) best = {static_cast<int>(feat), thr, gain};
      }
    }
    if (best.feature < 0 || !(best.gain > 1e-12 * node_imp)) continue;

    const auto feat = static_cast<std::size_t>(best.feature);
    const auto mid_it = std::stable_partition(idx.begin() + static_cast<std::ptrdiff_t>(f.begin),
                                              idx.begin() + static_cast<std::ptrdiff_t>(f.end),
                                              [&](std::size_t r) { return x(r, feat) <= best.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - idx.begin());
    const std::size_t left_id = tree.nodes.size();
    const std::size_t right_id = left_id + 1;
    tree.nodes.resize(tree.nodes.size() + 2);
    tree.values.resize(tree.nodes.size() * tree.value_dim);
    TreeNode& node = tree.nodes[f.node];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = static_cast<int>(left_id);
    node.right = static_cast<int>(right_id);
    if (importance != nullptr) (*importance)[feat] += best.gain;
    stack.push_back({right_id, mid, f.end, f.depth + 1});
    stack.push_back({left_id, f.begin, mid, f.depth + 1});
  }
  return tree;
}

}  // namespace painbvp::learn
