#include <algorithm>
#include <cmath>
#include <numeric>

#include "learn/common.hpp"
#include "painbvp/learn/ensemble.hpp"
#include "painbvp/parallel.hpp"

namespace painbvp::learn {

namespace {

HyperParams forest_params(const ForestOptions& o) {
  return {{"n_trees", static_cast<double>(o.n_trees)},
          {"max_depth", static_cast<double>(o.max_depth)},
          {"max_features", static_cast<double>(o.max_features)},
          {"min_leaf", static_cast<double>(o.min_leaf)}};
}

std::size_t resolve_mtry(std::size_t requested, std::size_t d, bool regression) {
  if (requested != 0) return std::min(requested, d);
  if (regression) return std::max<std::size_t>(1, d / 3);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
}

/// Grows `options.n_trees` trees in parallel; each tree draws from its own
/// derived stream, so the forest does not depend on scheduling.
std::vector<DecisionTree> grow(const Matrix& x, const TreeTarget& target, const ForestOptions& options,
                               const TreeOptions& tree_options, bool bootstrap, std::uint64_t seed,
                               std::vector<std::vector<double>>* importances) {
  if (options.n_trees == 0) throw Error(ErrorCode::kInvalidParameter, "n_trees must be >= 1");
  const std::size_t n = x.rows();
  std::vector<DecisionTree> trees(options.n_trees);
  if (importances != nullptr) importances->assign(options.n_trees, std::vector<double>(x.cols(), 0.0));
  parallel_for(options.n_trees, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::size_t> sample(n);
    if (bootstrap) {
      for (auto& s : sample) s = rng.index(n);
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    trees[t] = fit_tree(x, target, {}, sample, tree_options, rng,
                        importances != nullptr ? &(*importances)[t] : nullptr);
  });
  return trees;
}

std::unique_ptr<ForestModel> fit_forest_classifier(Family family, const Matrix& x, std::span<const int> labels,
                                                   const ForestOptions& options, std::uint64_t seed,
                                                   std::vector<double>* importance) {
  detail::check_training_data(x, labels.size());
  const EncodedLabels enc = detail::encode_classifier_labels(labels);
  const TreeTarget target{enc.codes, enc.classes.size(), {}};
  const bool extra = family == Family::kExtraTrees;
  TreeOptions to;
  to.criterion = Criterion::kGini;
  to.splitter = extra ? Splitter::kRandom : Splitter::kBest;
  to.max_depth = options.max_depth;
  to.min_samples_leaf = options.min_leaf;
  to.max_features = resolve_mtry(options.max_features, x.cols(), false);
  std::vector<std::vector<double>> per_tree;
  auto trees = grow(x, target, options, to, !extra, seed, importance != nullptr ? &per_tree : nullptr);
  if (importance != nullptr) {
    importance->assign(x.cols(), 0.0);
    for (auto& imp : per_tree) {
      const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
      if (total <= 0.0) continue;
      for (std::size_t j = 0; j < imp.size(); ++j) (*importance)[j] += imp[j] / total;
    }
    const double total = std::accumulate(importance->begin(), importance->end(), 0.0);
    if (total > 0.0) {
      for (double& v : *importance) v /= total;
    }
  }
  return std::make_unique<ForestModel>(family, enc.classes, x.cols(), forest_params(options), seed,
                                       std::move(trees));
}

}  // namespace

ForestModel::ForestModel(Family family, std::vector<int> classes, std::size_t n_features, HyperParams params,
                         std::uint64_t seed, std::vector<DecisionTree> trees)
    : Model(std::move(classes), n_features, std::move(params), seed), family_(family), trees_(std::move(trees)) {}

Matrix ForestModel::predict_proba(const Matrix& x) const {
  if (!is_classifier()) return Model::predict_proba(x);
  check_width(x);
  const std::size_t k = classes().size();
  Matrix out(x.rows(), k);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto p = out.row(i);
    for (const auto& tree : trees_) {
      const auto v = tree.predict(x.row(i));
      for (std::size_t c = 0; c < k; ++c) p[c] += v[c];
    }
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= total;
  }
  return out;
}

std::vector<double> ForestModel::predict_value(const Matrix& x) const {
  if (is_classifier()) return Model::predict_value(x);
  check_width(x);
  std::vector<double> out(x.rows(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (const auto& tree : trees_) out[i] += tree.predict(x.row(i))[0];
    out[i] /= static_cast<double>(trees_.size());
  }
  return out;
}

std::unique_ptr<ForestModel> fit_random_forest(const Matrix& x, std::span<const int> labels,
                                               const ForestOptions& options, std::uint64_t seed) {
  return fit_forest_classifier(Family::kRandomForest, x, labels, options, seed, nullptr);
}

std::unique_ptr<ForestModel> fit_extra_trees(const Matrix& x, std::span<const int> labels,
                                             const ForestOptions& options, std::uint64_t seed,
                                             std::vector<double>* importance) {
  return fit_forest_classifier(Family::kExtraTrees, x, labels, options, seed, importance);
}

std::unique_ptr<ForestModel> fit_random_forest_reg(const Matrix& x, std::span<const double> y,
                                                   const ForestOptions& options, std::uint64_t seed) {
  detail::check_training_data(x, y.size());
  const TreeTarget target{{}, 0, y};
  TreeOptions to;
  to.criterion = Criterion::kVariance;
  to.max_depth = options.max_depth;
  to.min_samples_leaf = options.min_leaf;
  to.max_features = resolve_mtry(options.max_features, x.cols(), true);
  auto trees = grow(x, target, options, to, true, seed, nullptr);
  return std::make_unique<ForestModel>(Family::kRandomForestReg, std::vector<int>{}, x.cols(),
                                       forest_params(options), seed, std::move(trees));
}

std::vector<double> extra_trees_importance(const Matrix& x, std::span<const int> labels, std::size_t n_trees,
                                           std::uint64_t seed) {
  ForestOptions options;
  options.n_trees = n_trees;
  std::vector<double> importance;
  fit_extra_trees(x, labels, options, seed, &importance);
  return importance;
}

}  // namespace painbvp::learn
