#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "painbvp/learn/model.hpp"
#include "painbvp/learn/tree.hpp"

namespace painbvp::learn {

/// Bagged or extremely randomised trees, classifier or regressor.
class ForestModel final : public Model {
 public:
  ForestModel(Family family, std::vector<int> classes, std::size_t n_features, HyperParams params,
              std::uint64_t seed, std::vector<DecisionTree> trees);

  Family family() const override { return family_; }
  Matrix predict_proba(const Matrix& x) const override;
  std::vector<double> predict_value(const Matrix& x) const override;
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

 private:
  Family family_;
  std::vector<DecisionTree> trees_;
};

struct ForestOptions {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;
  std::size_t max_features = 0;  // 0 = sqrt(d) for classification, d/3 for regression
  std::size_t min_leaf = 1;
};

std::unique_ptr<ForestModel> fit_random_forest(const Matrix& x, std::span<const int> labels,
                                               const ForestOptions& options, std::uint64_t seed);
std::unique_ptr<ForestModel> fit_extra_trees(const Matrix& x, std::span<const int> labels,
                                             const ForestOptions& options, std::uint64_t seed,
                                             std::vector<double>* importance = nullptr);
std::unique_ptr<ForestModel> fit_random_forest_reg(const Matrix& x, std::span<const double> y,
                                                   const ForestOptions& options, std::uint64_t seed);

/// Normalised Gini-decrease importance from extremely randomised trees; each
/// tree's decreases are normalised before averaging. Sums to 1 unless no
/// tree found a split, in which case every entry is 0.
std::vector<double> extra_trees_importance(const Matrix& x, std::span<const int> labels, std::size_t n_trees,
                                           std::uint64_t seed);

/// SAMME boosting over shallow trees.
class AdaBoostModel final : public Model {
 public:
  struct State {
    std::vector<DecisionTree> learners;
    std::vector<double> alphas;
    std::vector<double> prior;  // used when no learner was accepted
  };

  AdaBoostModel(std::vector<int> classes, std::size_t n_features, HyperParams params, std::uint64_t seed,
                State state);

  Family family() const override { return Family::kAdaBoost; }
  Matrix predict_proba(const Matrix& x) const override;
  const State& state() const noexcept { return state_; }

 private:
  State state_;
};

/// AdaBoost.R2 with linear loss; predictions are the weighted median.
class AdaBoostRegModel final : public Model {
 public:
  struct State {
    std::vector<DecisionTree> learners;
    std::vector<double> alphas;
    double fallback = 0.0;  // mean target when no learner was accepted
  };

  AdaBoostRegModel(std::size_t n_features, HyperParams params, std::uint64_t seed, State state);

  Family family() const override { return Family::kAdaBoostReg; }
  std::vector<double> predict_value(const Matrix& x) const override;
  const State& state() const noexcept { return state_; }

 private:
  State state_;
};

struct BoostTrace {
  std::vector<double> weight_sums;    // instance weight total after each accepted round
  std::vector<double> weighted_error; // per accepted round
  bool fell_back_to_prior = false;
};

std::unique_ptr<AdaBoostModel> fit_adaboost(const Matrix& x, std::span<const int> labels, std::size_t n_rounds,
                                            std::size_t max_depth, std::uint64_t seed, BoostTrace* trace = nullptr);
std::unique_ptr<AdaBoostRegModel> fit_adaboost_reg(const Matrix& x, std::span<const double> y, std::size_t n_rounds,
                                                   std::size_t max_depth, std::uint64_t seed,
                                                   BoostTrace* trace = nullptr);

/// Newton-boosted trees. Regression uses squared loss; classification uses
/// logistic loss, one booster per class (one-vs-rest) or a single booster
/// for binary tasks.
class GbtModel final : public Model {
 public:
  struct Booster {
    double base_score = 0.0;
    std::vector<DecisionTree> trees;  // leaf values already include shrinkage
  };
  struct State {
    std::vector<Booster> boosters;
  };

  GbtModel(Family family, std::vector<int> classes, std::size_t n_features, HyperParams params, std::uint64_t seed,
           State state);

  Family family() const override { return family_; }
  Matrix predict_proba(const Matrix& x) const override;
  std::vector<double> predict_value(const Matrix& x) const override;
  /// Raw additive score of each booster.
  Matrix raw_scores(const Matrix& x) const;
  const State& state() const noexcept { return state_; }

 private:
  Family family_;
  State state_;
};

struct GbtOptions {
  std::size_t n_rounds = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  double l2_leaf_lambda = 1.0;
  double min_child_weight = 1.0;
  std::size_t max_bins = 256;
  double subsample = 1.0;
};

struct GbtTrace {
  std::vector<double> training_loss;  // mean loss after each round (summed over boosters)
};

std::unique_ptr<GbtModel> fit_gbt(const Matrix& x, std::span<const int> labels, const GbtOptions& options,
                                  std::uint64_t seed, GbtTrace* trace = nullptr);
std::unique_ptr<GbtModel> fit_gbt_reg(const Matrix& x, std::span<const double> y, const GbtOptions& options,
                                      std::uint64_t seed, GbtTrace* trace = nullptr);

}  // namespace painbvp::learn
