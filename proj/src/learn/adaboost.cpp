#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "learn/common.hpp"
#include "painbvp/learn/ensemble.hpp"

namespace painbvp::learn {

namespace {

// Weight given to a learner that fits its weighted sample exactly.
constexpr double kPerfectLogOdds = 23.025850929940457;  // log(1e10)

std::size_t arg_max(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

void normalise(std::vector<double>& w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
}

}  // namespace

AdaBoostModel::AdaBoostModel(std::vector<int> classes, std::size_t n_features, HyperParams params,
                             std::uint64_t seed, State state)
    : Model(std::move(classes), n_features, std::move(params), seed), state_(std::move(state)) {}

Matrix AdaBoostModel::predict_proba(const Matrix& x) const {
  check_width(x);
  const std::size_t k = classes().size();
  Matrix out(x.rows(), k);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto p = out.row(i);
    if (state_.learners.empty()) {
      std::copy(state_.prior.begin(), state_.prior.end(), p.begin());
      continue;
    }
    for (std::size_t m = 0; m < state_.learners.size(); ++m) {
      p[arg_max(state_.learners[m].predict(x.row(i)))] += state_.alphas[m];
    }
    for (double& v : p) v /= static_cast<double>(k - 1);
    detail::softmax(p);
  }
  return out;
}

std::unique_ptr<AdaBoostModel> fit_adaboost(const Matrix& x, std::span<const int> labels, std::size_t n_rounds,
                                            std::size_t max_depth, std::uint64_t seed, BoostTrace* trace) {
  detail::check_training_data(x, labels.size());
  if (n_rounds == 0) throw Error(ErrorCode::kInvalidParameter, "n_rounds must be >= 1");
  const EncodedLabels enc = detail::encode_classifier_labels(labels);
  const std::size_t n = x.rows();
  const std::size_t k = enc.classes.size();
  const TreeTarget target{enc.codes, k, {}};
  TreeOptions to;
  to.max_depth = std::max<std::size_t>(1, max_depth);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<char> wrong(n);
  Rng rng(seed);

  AdaBoostModel::State state;
  state.prior.assign(k, 0.0);
  for (int c : enc.codes) state.prior[static_cast<std::size_t>(c)] += 1.0 / static_cast<double>(n);
  BoostTrace local;
  BoostTrace& tr = trace != nullptr ? *trace : local;
  tr = BoostTrace{};

  const double chance_error = 1.0 - 1.0 / static_cast<double>(k);
  for (std::size_t round = 0; round < n_rounds; ++round) {
    DecisionTree tree = fit_tree(x, target, w, all, to, rng);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wrong[i] = static_cast<int>(arg_max(tree.predict(x.row(i)))) != enc.codes[i];
      if (wrong[i]) err += w[i];
    }
    // A learner no better than chance would repeat every later round.
    if (err >= chance_error) {
      if (round == 0) {
        spdlog::warn("adaboost: weak learner cannot beat chance; using the class prior");
        tr.fell_back_to_prior = true;
      }
      break;
    }
    const bool perfect = err <= 0.0;
    const double alpha =
        (perfect ? kPerfectLogOdds : std::log((1.0 - err) / err)) + std::log(static_cast<double>(k - 1));
    state.learners.push_back(std::move(tree));
    state.alphas.push_back(alpha);
    tr.weighted_error.push_back(err);
    if (!perfect) {
      for (std::size_t i = 0; i < n; ++i) {
        if (wrong[i]) w[i] *= std::exp(alpha);
      }
      normalise(w);
    }
    tr.weight_sums.push_back(std::accumulate(w.begin(), w.end(), 0.0));
    if (perfect) break;
  }
  HyperParams params{{"n_rounds", static_cast<double>(n_rounds)}, {"max_depth", static_cast<double>(max_depth)}};
  return std::make_unique<AdaBoostModel>(enc.classes, x.cols(), std::move(params), seed, std::move(state));
}

AdaBoostRegModel::AdaBoostRegModel(std::size_t n_features, HyperParams params, std::uint64_t seed, State state)
    : Model({}, n_features, std::move(params), seed), state_(std::move(state)) {}

std::vector<double> AdaBoostRegModel::predict_value(const Matrix& x) const {
  check_width(x);
  std::vector<double> out(x.rows(), state_.fallback);
  if (state_.learners.empty()) return out;
  const std::size_t m = state_.learners.size();
  const double half = 0.5 * std::accumulate(state_.alphas.begin(), state_.alphas.end(), 0.0);
  std::vector<std::pair<double, double>> votes(m);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < m; ++j) votes[j] = {state_.learners[j].predict(x.row(i))[0], state_.alphas[j]};
    std::sort(votes.begin(), votes.end());
    double cum = 0.0;
    for (const auto& [value, alpha] : votes) {
      cum += alpha;
      if (cum >= half) {
        out[i] = value;
        break;
      }
    }
  }
  return out;
}

std::unique_ptr<AdaBoostRegModel> fit_adaboost_reg(const Matrix& x, std::span<const double> y, std::size_t n_rounds,
                                                   std::size_t max_depth, std::uint64_t seed, BoostTrace* trace) {
  detail::check_training_data(x, y.size());
  if (n_rounds == 0) throw Error(ErrorCode::kInvalidParameter, "n_rounds must be >= 1");
  const std::size_t n = x.rows();
  const TreeTarget target{{}, 0, y};
  TreeOptions to;
  to.criterion = Criterion::kVariance;
  to.max_depth = std::max<std::size_t>(1, max_depth);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> loss(n);
  Rng rng(seed);

  AdaBoostRegModel::State state;
  state.fallback = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  BoostTrace local;
  BoostTrace& tr = trace != nullptr ? *trace : local;
  tr = BoostTrace{};

  for (std::size_t round = 0; round < n_rounds; ++round) {
    DecisionTree tree = fit_tree(x, target, w, all, to, rng);
    double max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      loss[i] = std::abs(y[i] - tree.predict(x.row(i))[0]);
      max_err = std::max(max_err, loss[i]);
    }
    double avg = 0.0;
    if (max_err > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        loss[i] /= max_err;
        avg += w[i] * loss[i];
      }
    }
    if (avg >= 0.5) {
      // A first learner is kept alone rather than discarded; later ones stop
      // the loop.
      if (round == 0) {
        state.learners.push_back(std::move(tree));
        state.alphas.push_back(1.0);
        tr.weighted_error.push_back(avg);
        tr.weight_sums.push_back(std::accumulate(w.begin(), w.end(), 0.0));
      }
      break;
    }
    const bool perfect = avg <= 1e-12;
    const double beta = avg / (1.0 - avg);
    state.learners.push_back(std::move(tree));
    state.alphas.push_back(perfect ? kPerfectLogOdds : std::log(1.0 / beta));
    tr.weighted_error.push_back(avg);
    if (!perfect) {
      for (std::size_t i = 0; i < n; ++i) w[i] *= std::pow(beta, 1.0 - loss[i]);
      normalise(w);
    }
    tr.weight_sums.push_back(std::accumulate(w.begin(), w.end(), 0.0));
    if (perfect) break;
  }
  HyperParams params{{"n_rounds", static_cast<double>(n_rounds)}, {"max_depth", static_cast<double>(max_depth)}};
  return std::make_unique<AdaBoostRegModel>(x.cols(), std::move(params), seed, std::move(state));
}

}  // namespace painbvp::learn
