#include "painbvp/learn/linear.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "learn/common.hpp"
#include "learn/lbfgs.hpp"
#include "painbvp/rng.hpp"

namespace painbvp::learn {

LogisticObjective::LogisticObjective(const Matrix& x, std::span<const int> codes, std::size_t n_classes, double l2)
    : x_(x), codes_(codes.begin(), codes.end()), k_(n_classes), d_(x.cols()), l2_(l2) {}

double LogisticObjective::evaluate(std::span<const double> params, std::span<double> grad) const {
  const std::size_t n = x_.rows();
  const double* w = params.data();
  const double* b = params.data() + k_ * d_;
  std::fill(grad.begin(), grad.end(), 0.0);
  double* gw = grad.data();
  double* gb = grad.data() + k_ * d_;
  std::vector<double> z(k_);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x_.row(i);
    for (std::size_t k = 0; k < k_; ++k) {
      double s = b[k];
      for (std::size_t j = 0; j < d_; ++j) s += w[k * d_ + j] * row[j];
      z[k] = s;
    }
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double v : z) total += std::exp(v - top);
    const double lse = top + std::log(total);
    const auto y = static_cast<std::size_t>(codes_[i]);
    loss += lse - z[y];
    for (std::size_t k = 0; k < k_; ++k) {
      const double r = std::exp(z[k] - lse) - (k == y ? 1.0 : 0.0);
      gb[k] += r;
      for (std::size_t j = 0; j < d_; ++j) gw[k * d_ + j] += r * row[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  for (std::size_t i = 0; i < k_ * d_; ++i) {
    gw[i] = gw[i] * inv_n + 2.0 * l2_ * w[i];
    loss += l2_ * w[i] * w[i];
  }
  for (std::size_t k = 0; k < k_; ++k) gb[k] *= inv_n;
  return loss;
}

LogisticModel::LogisticModel(std::vector<int> classes, std::size_t n_features, HyperParams params,
                             std::uint64_t seed, State state)
    : Model(std::move(classes), n_features, std::move(params), seed), state_(std::move(state)) {}

Matrix LogisticModel::predict_proba(const Matrix& x) const {
  check_width(x);
  const std::size_t k = classes().size();
  Matrix out(x.rows(), k);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto p = out.row(i);
    const auto row = x.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      const auto w = state_.weights.row(c);
      p[c] = state_.intercepts[c] + std::inner_product(w.begin(), w.end(), row.begin(), 0.0);
    }
    detail::softmax(p);
  }
  return out;
}

std::unique_ptr<LogisticModel> fit_logistic(const Matrix& x, std::span<const int> labels, double l2_lambda,
                                            std::size_t max_iter, double tol) {
  detail::check_training_data(x, labels.size());
  if (!(l2_lambda >= 0.0) || !(tol > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "logistic regression needs l2_lambda >= 0 and tol > 0");
  }
  const EncodedLabels enc = detail::encode_classifier_labels(labels);
  const std::size_t k = enc.classes.size();
  const std::size_t d = x.cols();
  const LogisticObjective objective(x, enc.codes, k, l2_lambda);
  auto fg = [&objective](std::span<const double> p, std::span<double> g) { return objective.evaluate(p, g); };
  const detail::LbfgsResult res = detail::minimize_lbfgs(fg, std::vector<double>(objective.n_params(), 0.0),
                                                         max_iter, tol);
  if (!std::isfinite(res.f)) throw Error(ErrorCode::kTrainingDiverged, "logistic loss is not finite");

  LogisticModel::State state;
  state.weights = Matrix(k, d);
  std::copy(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(k * d), state.weights.row(0).begin());
  state.intercepts.assign(res.x.begin() + static_cast<std::ptrdiff_t>(k * d), res.x.end());
  state.converged = res.converged;
  state.iterations = res.iterations;
  HyperParams params{{"l2_lambda", l2_lambda}, {"max_iter", static_cast<double>(max_iter)}, {"tol", tol}};
  return std::make_unique<LogisticModel>(enc.classes, d, std::move(params), 0, std::move(state));
}

PegasosResult train_pegasos(const Matrix& x, std::span<const int> signs, double c, std::size_t epochs,
                            std::uint64_t seed) {
  if (!(c > 0.0) || epochs == 0) throw Error(ErrorCode::kInvalidParameter, "SVM needs C > 0 and epochs >= 1");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const double lambda = 1.0 / (c * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);
  // Last entry is the intercept, carried as a constant feature.
  std::vector<double> w(d + 1, 0.0), avg(d + 1, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  PegasosResult res;
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    const bool last = epoch + 1 == epochs;
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const auto row = x.row(i);
      const double y = signs[i];
      const double margin = y * (std::inner_product(row.begin(), row.end(), w.begin(), 0.0) + w[d]);
      const double shrink = 1.0 - eta * lambda;
      for (double& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * y * row[j];
        w[d] += eta * y;
      }
      double norm = 0.0;
      for (double v : w) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > radius) {
        for (double& v : w) v *= radius / norm;
      }
      if (last) {
        for (std::size_t j = 0; j <= d; ++j) avg[j] += w[j];
      }
    }
    double hinge = 0.0;
    double sq = 0.0;
    for (std::size_t j = 0; j <= d; ++j) sq += w[j] * w[j];
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = x.row(i);
      const double m = signs[i] * (std::inner_product(row.begin(), row.end(), w.begin(), 0.0) + w[d]);
      hinge += std::max(0.0, 1.0 - m);
    }
    res.epoch_objective.push_back(hinge / static_cast<double>(n) + 0.5 * lambda * sq);
  }
  for (double& v : avg) v /= static_cast<double>(n);
  res.intercept = avg[d];
  avg.pop_back();
  res.weights = std::move(avg);
  return res;
}

LinearSvmModel::LinearSvmModel(std::vector<int> classes, std::size_t n_features, HyperParams params,
                               std::uint64_t seed, State state)
    : Model(std::move(classes), n_features, std::move(params), seed), state_(std::move(state)) {}

Matrix LinearSvmModel::decision_function(const Matrix& x) const {
  check_width(x);
  const std::size_t m = state_.weights.rows();
  Matrix out(x.rows(), m);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    for (std::size_t c = 0; c < m; ++c) {
      const auto w = state_.weights.row(c);
      out(i, c) = state_.intercepts[c] + std::inner_product(w.begin(), w.end(), row.begin(), 0.0);
    }
  }
  return out;
}

Matrix LinearSvmModel::predict_proba(const Matrix& x) const {
  const Matrix margins = decision_function(x);
  const std::size_t k = classes().size();
  Matrix out(x.rows(), k);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto p = out.row(i);
    if (k == 2) {
      p[0] = -margins(i, 0);
      p[1] = margins(i, 0);
    } else {
      for (std::size_t c = 0; c < k; ++c) p[c] = margins(i, c);
    }
    detail::softmax(p);
  }
  return out;
}

std::unique_ptr<LinearSvmModel> fit_linear_svm(const Matrix& x, std::span<const int> labels, double c,
                                               std::size_t epochs, std::uint64_t seed) {
  detail::check_training_data(x, labels.size());
  const EncodedLabels enc = detail::encode_classifier_labels(labels);
  const std::size_t k = enc.classes.size();
  const std::size_t problems = k == 2 ? 1 : k;
  LinearSvmModel::State state;
  state.weights = Matrix(problems, x.cols());
  state.intercepts.resize(problems);
  std::vector<int> signs(labels.size());
  for (std::size_t p = 0; p < problems; ++p) {
    const int positive = k == 2 ? 1 : static_cast<int>(p);
    for (std::size_t i = 0; i < signs.size(); ++i) signs[i] = enc.codes[i] == positive ? 1 : -1;
    const PegasosResult r = train_pegasos(x, signs, c, epochs, derive_seed(seed, p));
    std::copy(r.weights.begin(), r.weights.end(), state.weights.row(p).begin());
    state.intercepts[p] = r.intercept;
  }
  HyperParams params{{"C", c}, {"epochs", static_cast<double>(epochs)}};
  return std::make_unique<LinearSvmModel>(enc.classes, x.cols(), std::move(params), seed, std::move(state));
}

LinearRegressor::LinearRegressor(Family family, std::size_t n_features, HyperParams params, std::uint64_t seed,
                                 State state)
    : Model({}, n_features, std::move(params), seed), family_(family), state_(std::move(state)) {}

std::vector<double> LinearRegressor::predict_value(const Matrix& x) const {
  check_width(x);
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    out[i] = state_.intercept + std::inner_product(row.begin(), row.end(), state_.weights.begin(), 0.0);
  }
  return out;
}

std::unique_ptr<LinearRegressor> fit_linreg(const Matrix& x, std::span<const double> y, double l2_lambda) {
  detail::check_training_data(x, y.size());
  if (!(l2_lambda >= 0.0)) throw Error(ErrorCode::kInvalidParameter, "l2_lambda must be >= 0");
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> xm(x.data().data(),
                                                                                                     n, d);
  const Eigen::Map<const Eigen::VectorXd> ym(y.data(), n);
  const Eigen::RowVectorXd x_mean = xm.colwise().mean();
  const double y_mean = ym.mean();
  const Eigen::MatrixXd xc = xm.rowwise() - x_mean;
  const Eigen::VectorXd yc = ym.array() - y_mean;
  Eigen::MatrixXd gram = xc.transpose() * xc / static_cast<double>(n);
  gram.diagonal().array() += l2_lambda;
  const Eigen::VectorXd rhs = xc.transpose() * yc / static_cast<double>(n);
  Eigen::VectorXd w = gram.ldlt().solve(rhs);
  if (!w.allFinite()) {
    w = gram.completeOrthogonalDecomposition().solve(rhs);
  }
  LinearRegressor::State state;
  state.weights.assign(w.data(), w.data() + d);
  state.intercept = y_mean - x_mean.dot(w);
  return std::make_unique<LinearRegressor>(Family::kLinReg, x.cols(), HyperParams{{"l2_lambda", l2_lambda}}, 0,
                                           std::move(state));
}

std::unique_ptr<LinearRegressor> fit_svr_linear(const Matrix& x, std::span<const double> y, double c,
                                                double epsilon, std::size_t epochs, std::uint64_t seed) {
  detail::check_training_data(x, y.size());
  if (!(c > 0.0) || !(epsilon >= 0.0) || epochs == 0) {
    throw Error(ErrorCode::kInvalidParameter, "SVR needs C > 0, epsilon >= 0 and epochs >= 1");
  }
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  const double lambda = 1.0 / (c * static_cast<double>(n));
  std::vector<double> w(d + 1, 0.0), avg(d + 1, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    const bool last = epoch + 1 == epochs;
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const auto row = x.row(i);
      const double r = (y[i] - y_mean) - (std::inner_product(row.begin(), row.end(), w.begin(), 0.0) + w[d]);
      const double shrink = 1.0 - eta * lambda;
      for (double& v : w) v *= shrink;
      const double sign = r > epsilon ? 1.0 : (r < -epsilon ? -1.0 : 0.0);
      if (sign != 0.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * sign * row[j];
        w[d] += eta * sign;
      }
      if (last) {
        for (std::size_t j = 0; j <= d; ++j) avg[j] += w[j];
      }
    }
  }
  for (double& v : avg) v /= static_cast<double>(n);
  LinearRegressor::State state;
  state.intercept = y_mean + avg[d];
  avg.pop_back();
  state.weights = std::move(avg);
  for (double v : state.weights) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kTrainingDiverged, "SVR weights are not finite");
  }
  HyperParams params{{"C", c}, {"epsilon", epsilon}, {"epochs", static_cast<double>(epochs)}};
  return std::make_unique<LinearRegressor>(Family::kSvrLinear, d, std::move(params), seed, std::move(state));
}

}  // namespace painbvp::learn
