#include "painbvp/learn/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "learn/common.hpp"
#include "painbvp/learn/ensemble.hpp"
#include "painbvp/learn/linear.hpp"

namespace painbvp::learn {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 11> kFamilyNames{{
    {Family::kLogReg, "logreg"},
    {Family::kLinSvm, "linsvm"},
    {Family::kRandomForest, "rforest"},
    {Family::kExtraTrees, "extratrees"},
    {Family::kAdaBoost, "adaboost"},
    {Family::kGbt, "gbt"},
    {Family::kLinReg, "linreg"},
    {Family::kSvrLinear, "svr_linear"},
    {Family::kRandomForestReg, "rforest_reg"},
    {Family::kAdaBoostReg, "adaboost_reg"},
    {Family::kGbtReg, "gbt_reg"},
}};

HyperParams gbt_defaults() {
  return {{"n_rounds", 100}, {"learning_rate", 0.1}, {"max_depth", 3},  {"l2_leaf_lambda", 1.0},
          {"min_child_weight", 1.0}, {"max_bins", 256}, {"subsample", 1.0}};
}

HyperParams forest_defaults() { return {{"n_trees", 100}, {"max_depth", 0}, {"max_features", 0}, {"min_leaf", 1}}; }

ForestOptions forest_options(const HyperParams& p) {
  return {detail::count_param(p, "n_trees"), detail::count_param(p, "max_depth"),
          detail::count_param(p, "max_features"), detail::count_param(p, "min_leaf")};
}

GbtOptions gbt_options(const HyperParams& p) {
  GbtOptions o;
  o.n_rounds = detail::count_param(p, "n_rounds");
  o.learning_rate = detail::real_param(p, "learning_rate");
  o.max_depth = detail::count_param(p, "max_depth");
  o.l2_leaf_lambda = detail::real_param(p, "l2_leaf_lambda");
  o.min_child_weight = detail::real_param(p, "min_child_weight");
  o.max_bins = detail::count_param(p, "max_bins");
  o.subsample = detail::real_param(p, "subsample");
  return o;
}

}  // namespace

std::string_view to_string(Family family) {
  for (const auto& [f, name] : kFamilyNames) {
    if (f == family) return name;
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (const auto& [f, n] : kFamilyNames) {
    if (n == name) return f;
  }
  throw Error(ErrorCode::kInvalidConfiguration, "unknown model family '" + std::string(name) + "'");
}

bool is_regression(Family family) {
  switch (family) {
    case Family::kLinReg:
    case Family::kSvrLinear:
    case Family::kRandomForestReg:
    case Family::kAdaBoostReg:
    case Family::kGbtReg:
      return true;
    default:
      return false;
  }
}

HyperParams default_params(Family family) {
  switch (family) {
    case Family::kLogReg:
      return {{"l2_lambda", 1e-3}, {"max_iter", 500}, {"tol", 1e-8}};
    case Family::kLinSvm:
      return {{"C", 1.0}, {"epochs", 50}};
    case Family::kRandomForest:
    case Family::kExtraTrees:
    case Family::kRandomForestReg:
      return forest_defaults();
    case Family::kAdaBoost:
      return {{"n_rounds", 100}, {"max_depth", 1}};
    case Family::kAdaBoostReg:
      return {{"n_rounds", 50}, {"max_depth", 3}};
    case Family::kGbt:
    case Family::kGbtReg:
      return gbt_defaults();
    case Family::kLinReg:
      return {{"l2_lambda", 0.0}};
    case Family::kSvrLinear:
      return {{"C", 1.0}, {"epsilon", 0.1}, {"epochs", 50}};
  }
  return {};
}

HyperParams resolve_params(const ModelSpec& spec) {
  HyperParams params = default_params(spec.family);
  for (const auto& [key, value] : spec.params) {
    auto it = params.find(key);
    if (it == params.end()) {
      throw Error(ErrorCode::kInvalidConfiguration,
                  "unknown hyperparameter '" + key + "' for " + std::string(to_string(spec.family)));
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::kInvalidConfiguration, "hyperparameter '" + key + "' is not finite");
    }
    it->second = value;
  }
  return params;
}

void Model::check_width(const Matrix& x) const {
  if (x.cols() != n_features_) {
    throw Error(ErrorCode::kInvalidInput, "expected " + std::to_string(n_features_) + " features, got " +
                                              std::to_string(x.cols()));
  }
}

Matrix Model::predict_proba(const Matrix&) const {
  throw Error(ErrorCode::kInvalidParameter, "predict_proba is not available for a regressor");
}

std::vector<double> Model::predict_value(const Matrix&) const {
  throw Error(ErrorCode::kInvalidParameter, "predict_value is not available for a classifier");
}

std::vector<int> Model::predict(const Matrix& x) const {
  const Matrix proba = predict_proba(x);
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = proba.row(i);
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    out[i] = classes_[static_cast<std::size_t>(best)];
  }
  return out;
}

EncodedLabels encode_labels(std::span<const int> labels) {
  EncodedLabels enc;
  enc.classes.assign(labels.begin(), labels.end());
  std::sort(enc.classes.begin(), enc.classes.end());
  enc.classes.erase(std::unique(enc.classes.begin(), enc.classes.end()), enc.classes.end());
  enc.codes.reserve(labels.size());
  for (int label : labels) {
    enc.codes.push_back(
        static_cast<int>(std::lower_bound(enc.classes.begin(), enc.classes.end(), label) - enc.classes.begin()));
  }
  return enc;
}

std::unique_ptr<Model> fit_classifier(const ModelSpec& spec, const Matrix& x, std::span<const int> labels,
                                      std::uint64_t seed) {
  if (is_regression(spec.family)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                std::string(to_string(spec.family)) + " is a regression family");
  }
  const HyperParams p = resolve_params(spec);
  std::unique_ptr<Model> model;
  switch (spec.family) {
    case Family::kLogReg:
      model = fit_logistic(x, labels, detail::real_param(p, "l2_lambda"), detail::count_param(p, "max_iter"),
                           detail::real_param(p, "tol"));
      break;
    case Family::kLinSvm:
      model = fit_linear_svm(x, labels, detail::real_param(p, "C"), detail::count_param(p, "epochs"), seed);
      break;
    case Family::kRandomForest:
      model = fit_random_forest(x, labels, forest_options(p), seed);
      break;
    case Family::kExtraTrees:
      model = fit_extra_trees(x, labels, forest_options(p), seed);
      break;
    case Family::kAdaBoost:
      model = fit_adaboost(x, labels, detail::count_param(p, "n_rounds"), detail::count_param(p, "max_depth"), seed);
      break;
    case Family::kGbt:
      model = fit_gbt(x, labels, gbt_options(p), seed);
      break;
    default:
      break;
  }
  return model;
}

std::unique_ptr<Model> fit_regressor(const ModelSpec& spec, const Matrix& x, std::span<const double> targets,
                                     std::uint64_t seed) {
  if (!is_regression(spec.family)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                std::string(to_string(spec.family)) + " is a classification family");
  }
  const HyperParams p = resolve_params(spec);
  std::unique_ptr<Model> model;
  switch (spec.family) {
    case Family::kLinReg:
      model = fit_linreg(x, targets, detail::real_param(p, "l2_lambda"));
      break;
    case Family::kSvrLinear:
      model = fit_svr_linear(x, targets, detail::real_param(p, "C"), detail::real_param(p, "epsilon"),
                             detail::count_param(p, "epochs"), seed);
      break;
    case Family::kRandomForestReg:
      model = fit_random_forest_reg(x, targets, forest_options(p), seed);
      break;
    case Family::kAdaBoostReg:
      model = fit_adaboost_reg(x, targets, detail::count_param(p, "n_rounds"), detail::count_param(p, "max_depth"),
                               seed);
      break;
    case Family::kGbtReg:
      model = fit_gbt_reg(x, targets, gbt_options(p), seed);
      break;
    default:
      break;
  }
  return model;
}

namespace detail {

double real_param(const HyperParams& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw Error(ErrorCode::kInvalidConfiguration, "missing hyperparameter '" + name + "'");
  return it->second;
}

std::size_t count_param(const HyperParams& params, const std::string& name) {
  const double v = real_param(params, name);
  if (v < 0.0 || v != std::floor(v) || v > 1e9) {
    throw Error(ErrorCode::kInvalidConfiguration, "hyperparameter '" + name + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

void check_training_data(const Matrix& x, std::size_t n_targets) {
  if (x.rows() == 0 || x.cols() == 0) throw Error(ErrorCode::kInvalidInput, "empty training matrix");
  if (x.rows() != n_targets) throw Error(ErrorCode::kInvalidInput, "feature rows and targets differ in length");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidInput, "non-finite training feature");
  }
}

EncodedLabels encode_classifier_labels(std::span<const int> labels) {
  EncodedLabels enc = encode_labels(labels);
  if (enc.classes.size() < 2) throw Error(ErrorCode::kInvalidInput, "training data contains a single class");
  return enc;
}

void softmax(std::span<double> scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    total += s;
  }
  for (double& s : scores) s /= total;
}

}  // namespace detail

}  // namespace painbvp::learn
