#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "painbvp/learn/model.hpp"

namespace painbvp::learn {

/// Mean multinomial log-loss plus l2 * ||W||^2 (intercepts unpenalised).
/// Parameter layout: K rows of d weights, then K intercepts.
class LogisticObjective {
 public:
  LogisticObjective(const Matrix& x, std::span<const int> codes, std::size_t n_classes, double l2);

  std::size_t n_params() const noexcept { return k_ * (d_ + 1); }
  /// Returns the loss and writes the gradient.
  double evaluate(std::span<const double> params, std::span<double> grad) const;

 private:
  const Matrix& x_;
  std::vector<int> codes_;
  std::size_t k_;
  std::size_t d_;
  double l2_;
};

class LogisticModel final : public Model {
 public:
  struct State {
    Matrix weights;  // K x d
    std::vector<double> intercepts;
    bool converged = false;
    std::size_t iterations = 0;
  };

  LogisticModel(std::vector<int> classes, std::size_t n_features, HyperParams params, std::uint64_t seed,
                State state);

  Family family() const override { return Family::kLogReg; }
  Matrix predict_proba(const Matrix& x) const override;
  const State& state() const noexcept { return state_; }

 private:
  State state_;
};

/// Linear one-vs-rest SVM. Binary problems keep a single row scoring
/// classes()[1]; probabilities are a softmax over the class margins.
class LinearSvmModel final : public Model {
 public:
  struct State {
    Matrix weights;
    std::vector<double> intercepts;
  };

  LinearSvmModel(std::vector<int> classes, std::size_t n_features, HyperParams params, std::uint64_t seed,
                 State state);

  Family family() const override { return Family::kLinSvm; }
  Matrix predict_proba(const Matrix& x) const override;
  /// Raw margins, one column per weight row.
  Matrix decision_function(const Matrix& x) const;
  const State& state() const noexcept { return state_; }

 private:
  State state_;
};

/// Linear regressor shared by ridge regression and linear SVR.
class LinearRegressor final : public Model {
 public:
  struct State {
    std::vector<double> weights;
    double intercept = 0.0;
  };

  LinearRegressor(Family family, std::size_t n_features, HyperParams params, std::uint64_t seed, State state);

  Family family() const override { return family_; }
  std::vector<double> predict_value(const Matrix& x) const override;
  const State& state() const noexcept { return state_; }

 private:
  Family family_;
  State state_;
};

/// Result of projected-subgradient training on one +/-1 problem.
struct PegasosResult {
  std::vector<double> weights;
  double intercept = 0.0;
  std::vector<double> epoch_objective;  // hinge loss + ||w||^2 / (2C n) per epoch
};
PegasosResult train_pegasos(const Matrix& x, std::span<const int> signs, double c, std::size_t epochs,
                            std::uint64_t seed);

std::unique_ptr<LogisticModel> fit_logistic(const Matrix& x, std::span<const int> labels, double l2_lambda,
                                            std::size_t max_iter, double tol);
std::unique_ptr<LinearSvmModel> fit_linear_svm(const Matrix& x, std::span<const int> labels, double c,
                                               std::size_t epochs, std::uint64_t seed);
std::unique_ptr<LinearRegressor> fit_linreg(const Matrix& x, std::span<const double> y, double l2_lambda);
std::unique_ptr<LinearRegressor> fit_svr_linear(const Matrix& x, std::span<const double> y, double c,
                                                double epsilon, std::size_t epochs, std::uint64_t seed);

}  // namespace painbvp::learn
