#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "painbvp/matrix.hpp"

namespace painbvp {

/// Rows are true classes, columns predicted classes, both in `classes` order.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<int> classes);
  static ConfusionMatrix from_predictions(std::vector<int> classes, std::span<const int> truth,
                                          std::span<const int> predicted);

  void add(int truth, int predicted);
  /// Adds another matrix over the same class list.
  void merge(const ConfusionMatrix& other);
  std::size_t size() const noexcept { return classes_.size(); }
  const std::vector<int>& classes() const noexcept { return classes_; }
  std::size_t count(std::size_t truth_index, std::size_t predicted_index) const {
    return counts_[truth_index * classes_.size() + predicted_index];
  }
  std::size_t total() const;
  std::size_t index_of(int label) const;

 private:
  std::vector<int> classes_;
  std::vector<std::size_t> counts_;
};

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool had_zero_division = false;
};

/// 0/0 terms are reported as 0 and flagged.
PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm, std::size_t class_index);
double f1_macro(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);
/// Mean per-class recall; throws kUndefinedClass when a class has no true rows.
double balanced_accuracy(const ConfusionMatrix& cm);

/// Probability that a random positive outscores a random negative, ties
/// counting one half (midrank formulation). `labels` are 0/1.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct MacroAuc {
  double value = 0.0;
  std::vector<std::optional<double>> per_class;  // empty for skipped classes
  std::vector<int> skipped_classes;
};
/// Unweighted one-vs-rest mean over the columns of `proba`, whose order is
/// `classes`. Classes absent from `labels` (or covering every row) are
/// skipped and listed.
MacroAuc macro_ovr_auc(const Matrix& proba, std::span<const int> labels, std::span<const int> classes);

struct RegressionErrors {
  double mae = 0.0;
  double rmse = 0.0;
};
RegressionErrors mae_rmse(std::span<const double> truth, std::span<const double> predicted);

}  // namespace painbvp
