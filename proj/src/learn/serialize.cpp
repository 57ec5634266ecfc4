#include <json.hpp>

#include "learn/common.hpp"
#include "painbvp/learn/ensemble.hpp"
#include "painbvp/learn/linear.hpp"

namespace painbvp::learn {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "painbvp-model";
constexpr int kVersion = 1;

json matrix_to_json(const Matrix& m) { return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}}; }

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.rows() * m.cols()) throw Error(ErrorCode::kInvalidInput, "matrix size mismatch");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t c = 0; c < m.cols(); ++c) m(i, c) = data[i * m.cols() + c];
  }
  return m;
}

json tree_to_json(const DecisionTree& t) {
  json j;
  std::vector<int> feature, left, right;
  std::vector<double> threshold;
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
  }
  j["feature"] = feature;
  j["threshold"] = threshold;
  j["left"] = left;
  j["right"] = right;
  j["values"] = t.values;
  j["value_dim"] = t.value_dim;
  return j;
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree t;
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  t.values = j.at("values").get<std::vector<double>>();
  t.value_dim = j.at("value_dim").get<std::size_t>();
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || t.values.size() != n * t.value_dim || n == 0) {
    throw Error(ErrorCode::kInvalidInput, "malformed tree");
  }
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.nodes[i] = {feature[i], threshold[i], left[i], right[i]};
    if (feature[i] >= 0) {
      const auto in_range = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
      if (!in_range(left[i]) || !in_range(right[i])) throw Error(ErrorCode::kInvalidInput, "malformed tree links");
    }
  }
  return t;
}

json trees_to_json(const std::vector<DecisionTree>& trees) {
  json arr = json::array();
  for (const auto& t : trees) arr.push_back(tree_to_json(t));
  return arr;
}

std::vector<DecisionTree> trees_from_json(const json& j) {
  std::vector<DecisionTree> trees;
  for (const auto& t : j) trees.push_back(tree_from_json(t));
  return trees;
}

json state_to_json(const Model& model) {
  json s;
  if (const auto* m = dynamic_cast<const LogisticModel*>(&model)) {
    s["weights"] = matrix_to_json(m->state().weights);
    s["intercepts"] = m->state().intercepts;
    s["converged"] = m->state().converged;
    s["iterations"] = m->state().iterations;
  } else if (const auto* m = dynamic_cast<const LinearSvmModel*>(&model)) {
    s["weights"] = matrix_to_json(m->state().weights);
    s["intercepts"] = m->state().intercepts;
  } else if (const auto* m = dynamic_cast<const LinearRegressor*>(&model)) {
    s["weights"] = m->state().weights;
    s["intercept"] = m->state().intercept;
  } else if (const auto* m = dynamic_cast<const ForestModel*>(&model)) {
    s["trees"] = trees_to_json(m->trees());
  } else if (const auto* m = dynamic_cast<const AdaBoostModel*>(&model)) {
    s["learners"] = trees_to_json(m->state().learners);
    s["alphas"] = m->state().alphas;
    s["prior"] = m->state().prior;
  } else if (const auto* m = dynamic_cast<const AdaBoostRegModel*>(&model)) {
    s["learners"] = trees_to_json(m->state().learners);
    s["alphas"] = m->state().alphas;
    s["fallback"] = m->state().fallback;
  } else if (const auto* m = dynamic_cast<const GbtModel*>(&model)) {
    json boosters = json::array();
    for (const auto& b : m->state().boosters) {
      boosters.push_back({{"base_score", b.base_score}, {"trees", trees_to_json(b.trees)}});
    }
    s["boosters"] = boosters;
  } else {
    throw Error(ErrorCode::kInvalidInput, "unsupported model type for serialization");
  }
  return s;
}

}  // namespace

std::string serialize_model(const Model& model) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["family"] = std::string(to_string(model.family()));
  j["params"] = model.params();
  j["seed"] = model.seed();
  j["classes"] = model.classes();
  j["n_features"] = model.n_features();
  j["state"] = state_to_json(model);
  return j.dump();
}

std::unique_ptr<Model> deserialize_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) throw Error(ErrorCode::kInvalidInput, "not a model document");
    if (j.at("version").get<int>() != kVersion) throw Error(ErrorCode::kInvalidInput, "unsupported model version");
    const Family family = family_from_string(j.at("family").get<std::string>());
    auto params = j.at("params").get<HyperParams>();
    const auto seed = j.at("seed").get<std::uint64_t>();
    auto classes = j.at("classes").get<std::vector<int>>();
    const auto d = j.at("n_features").get<std::size_t>();
    const json& s = j.at("state");
    switch (family) {
      case Family::kLogReg: {
        LogisticModel::State st{matrix_from_json(s.at("weights")), s.at("intercepts").get<std::vector<double>>(),
                                s.at("converged").get<bool>(), s.at("iterations").get<std::size_t>()};
        return std::make_unique<LogisticModel>(std::move(classes), d, std::move(params), seed, std::move(st));
      }
      case Family::kLinSvm: {
        LinearSvmModel::State st{matrix_from_json(s.at("weights")), s.at("intercepts").get<std::vector<double>>()};
        return std::make_unique<LinearSvmModel>(std::move(classes), d, std::move(params), seed, std::move(st));
      }
      case Family::kLinReg:
      case Family::kSvrLinear: {
        LinearRegressor::State st{s.at("weights").get<std::vector<double>>(), s.at("intercept").get<double>()};
        return std::make_unique<LinearRegressor>(family, d, std::move(params), seed, std::move(st));
      }
      case Family::kRandomForest:
      case Family::kExtraTrees:
      case Family::kRandomForestReg:
        return std::make_unique<ForestModel>(family, std::move(classes), d, std::move(params), seed,
                                             trees_from_json(s.at("trees")));
      case Family::kAdaBoost: {
        AdaBoostModel::State st{trees_from_json(s.at("learners")), s.at("alphas").get<std::vector<double>>(),
                                s.at("prior").get<std::vector<double>>()};
        return std::make_unique<AdaBoostModel>(std::move(classes), d, std::move(params), seed, std::move(st));
      }
      case Family::kAdaBoostReg: {
        AdaBoostRegModel::State st{trees_from_json(s.at("learners")), s.at("alphas").get<std::vector<double>>(),
                                   s.at("fallback").get<double>()};
        return std::make_unique<AdaBoostRegModel>(d, std::move(params), seed, std::move(st));
      }
      case Family::kGbt:
      case Family::kGbtReg: {
        GbtModel::State st;
        for (const auto& b : s.at("boosters")) {
          st.boosters.push_back({b.at("base_score").get<double>(), trees_from_json(b.at("trees"))});
        }
        return std::make_unique<GbtModel>(family, std::move(classes), d, std::move(params), seed, std::move(st));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("malformed model document: ") + e.what());
  }
  throw Error(ErrorCode::kInvalidInput, "unsupported model family");
}

}  // namespace painbvp::learn
