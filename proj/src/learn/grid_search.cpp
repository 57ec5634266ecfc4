#include "painbvp/learn/grid_search.hpp"

#include <spdlog/spdlog.h>

#include "learn/common.hpp"
#include "painbvp/metrics.hpp"
#include "painbvp/parallel.hpp"

namespace painbvp::learn {

std::vector<HyperParams> enumerate_grid(const HyperGrid& grid) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidConfiguration, "hyperparameter grid is empty");
  std::vector<HyperParams> points{HyperParams{}};
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw Error(ErrorCode::kInvalidConfiguration, "grid entry '" + name + "' has no values");
    std::vector<HyperParams> next;
    next.reserve(points.size() * values.size());
    for (const auto& p : points) {
      for (double v : values) {
        HyperParams q = p;
        q[name] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

GridSearchResult grid_search(Family family, const HyperGrid& grid, const SearchData& data, std::uint64_t seed) {
  if (data.train_x == nullptr || data.tuning_x == nullptr) {
    throw Error(ErrorCode::kInvalidInput, "grid search needs training and tuning matrices");
  }
  const bool regression = is_regression(family);
  GridSearchResult result;
  result.metric = regression ? "mae" : "f1_macro";
  const std::vector<HyperParams> points = enumerate_grid(grid);
  result.points.resize(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    GridPointResult& pr = result.points[i];
    pr.params = points[i];
    try {
      const ModelSpec spec{family, points[i]};
      if (regression) {
        const auto model = fit_regressor(spec, *data.train_x, data.train_targets, seed);
        const auto pred = model->predict_value(*data.tuning_x);
        pr.score = mae_rmse(data.tuning_targets, pred).mae;
      } else {
        const auto model = fit_classifier(spec, *data.train_x, data.train_labels, seed);
        const auto pred = model->predict(*data.tuning_x);
        pr.score = f1_macro(ConfusionMatrix::from_predictions(model->classes(), data.tuning_labels, pred));
      }
    } catch (const Error& e) {
      pr.error = e.what();
    }
  });
  bool found = false;
  for (const auto& pr : result.points) {
    if (!pr.score) {
      spdlog::warn("grid search: point skipped: {}", pr.error);
      continue;
    }
    const bool better = !found || (regression ? *pr.score < result.best_score : *pr.score > result.best_score);
    if (better) {
      found = true;
      result.best = pr.params;
      result.best_score = *pr.score;
    }
  }
  if (!found) throw Error(ErrorCode::kSearchFailed, "every grid point failed to train");
  return result;
}

HyperGrid default_grid(Family family) {
  switch (family) {
    case Family::kLogReg:
      return {{"l2_lambda", {1e-4, 1e-3, 1e-2, 1e-1}}};
    case Family::kLinSvm:
    case Family::kSvrLinear:
      return {{"C", {0.1, 1.0, 10.0}}};
    case Family::kRandomForest:
    case Family::kExtraTrees:
    case Family::kRandomForestReg:
      return {{"n_trees", {100, 300}}, {"max_depth", {2, 3, 4, 6}}};
    case Family::kAdaBoost:
    case Family::kAdaBoostReg:
      return {{"n_rounds", {100, 300}}, {"max_depth", {1, 2, 3}}};
    case Family::kGbt:
    case Family::kGbtReg:
      return {{"n_rounds", {100, 300}},
              {"max_depth", {2, 3, 4, 6}},
              {"learning_rate", {0.05, 0.1, 0.3}},
              {"l2_leaf_lambda", {0.1, 1.0, 10.0}}};
    case Family::kLinReg:
      return {{"l2_lambda", {0.0, 0.01, 0.1, 1.0}}};
  }
  return {};
}

}  // namespace painbvp::learn
