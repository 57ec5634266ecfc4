#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "painbvp/matrix.hpp"

namespace painbvp::learn {

enum class Family {
  kLogReg,
  kLinSvm,
  kRandomForest,
  kExtraTrees,
  kAdaBoost,
  kGbt,
  kLinReg,
  kSvrLinear,
  kRandomForestReg,
  kAdaBoostReg,
  kGbtReg,
};

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);
bool is_regression(Family family);

using HyperParams = std::map<std::string, double>;

/// Family plus hyperparameters; unspecified hyperparameters take the
/// family defaults.
struct ModelSpec {
  Family family = Family::kGbt;
  HyperParams params;
};

/// Built-in hyperparameter defaults for a family (every accepted key).
HyperParams default_params(Family family);

/// Defaults overlaid with `spec.params`; throws kInvalidConfiguration on an
/// unknown key.
HyperParams resolve_params(const ModelSpec& spec);

/// A fitted predictor. Classifiers report probabilities over `classes()` in
/// ascending label order; regressors return real-valued predictions.
class Model {
 public:
  virtual ~Model() = default;

  virtual Family family() const = 0;
  bool is_classifier() const { return !is_regression(family()); }

  const std::vector<int>& classes() const noexcept { return classes_; }
  std::size_t n_features() const noexcept { return n_features_; }
  const HyperParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Rows sum to one. Regressors throw kInvalidParameter.
  virtual Matrix predict_proba(const Matrix& x) const;
  /// Arg-max class label per row (ties to the lowest label).
  std::vector<int> predict(const Matrix& x) const;
  /// Regressors only.
  virtual std::vector<double> predict_value(const Matrix& x) const;

 protected:
  Model(std::vector<int> classes, std::size_t n_features, HyperParams params, std::uint64_t seed)
      : classes_(std::move(classes)), n_features_(n_features), params_(std::move(params)), seed_(seed) {}

  void check_width(const Matrix& x) const;

 private:
  std::vector<int> classes_;
  std::size_t n_features_;
  HyperParams params_;
  std::uint64_t seed_;
};

std::unique_ptr<Model> fit_classifier(const ModelSpec& spec, const Matrix& x, std::span<const int> labels,
                                      std::uint64_t seed);
std::unique_ptr<Model> fit_regressor(const ModelSpec& spec, const Matrix& x, std::span<const double> targets,
                                     std::uint64_t seed);

/// Versioned JSON container (family, hyperparameters, seed, parameters).
/// Doubles are written with round-trip precision so a reloaded model
/// predicts bit-identically.
std::string serialize_model(const Model& model);
std::unique_ptr<Model> deserialize_model(std::string_view text);

/// Sorted distinct labels and each row's index into them.
struct EncodedLabels {
  std::vector<int> classes;
  std::vector<int> codes;
};
EncodedLabels encode_labels(std::span<const int> labels);

}  // namespace painbvp::learn
