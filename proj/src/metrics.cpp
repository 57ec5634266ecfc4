#include "painbvp/metrics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "painbvp/error.hpp"

namespace painbvp {

ConfusionMatrix::ConfusionMatrix(std::vector<int> classes)
    : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0) {
  if (classes_.empty()) throw Error(ErrorCode::kInvalidInput, "confusion matrix needs at least one class");
}

ConfusionMatrix ConfusionMatrix::from_predictions(std::vector<int> classes, std::span<const int> truth,
                                                  std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw Error(ErrorCode::kInvalidInput, "truth/prediction length mismatch");
  ConfusionMatrix cm(std::move(classes));
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return cm;
}

std::size_t ConfusionMatrix::index_of(int label) const {
  const auto it = std::find(classes_.begin(), classes_.end(), label);
  if (it == classes_.end()) throw Error(ErrorCode::kInvalidInput, "label " + std::to_string(label) + " not in class list");
  return static_cast<std::size_t>(it - classes_.begin());
}

void ConfusionMatrix::add(int truth, int predicted) { ++counts_[index_of(truth) * classes_.size() + index_of(predicted)]; }

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw Error(ErrorCode::kInvalidInput, "confusion matrices differ in classes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm, std::size_t c) {
  std::size_t tp = cm.count(c, c);
  std::size_t predicted = 0;
  std::size_t actual = 0;
  for (std::size_t j = 0; j < cm.size(); ++j) {
    predicted += cm.count(j, c);
    actual += cm.count(c, j);
  }
  PrecisionRecallF1 r;
  auto ratio = [&r](double num, double den) {
    if (den == 0.0) {
      r.had_zero_division = true;
      return 0.0;
    }
    return num / den;
  };
  r.precision = ratio(static_cast<double>(tp), static_cast<double>(predicted));
  r.recall = ratio(static_cast<double>(tp), static_cast<double>(actual));
  r.f1 = ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
  if (r.had_zero_division) {
    spdlog::warn("class {}: zero denominator in precision/recall/F1; reported as 0", cm.classes()[c]);
  }
  return r;
}

double f1_macro(const ConfusionMatrix& cm) {
  double total = 0.0;
  for (std::size_t c = 0; c < cm.size(); ++c) total += precision_recall_f1(cm, c).f1;
  return total / static_cast<double>(cm.size());
}

double accuracy(const ConfusionMatrix& cm) {
  const std::size_t n = cm.total();
  if (n == 0) throw Error(ErrorCode::kInvalidInput, "empty confusion matrix");
  std::size_t hits = 0;
  for (std::size_t c = 0; c < cm.size(); ++c) hits += cm.count(c, c);
  return static_cast<double>(hits) / static_cast<double>(n);
}

double balanced_accuracy(const ConfusionMatrix& cm) {
  double total = 0.0;
  for (std::size_t c = 0; c < cm.size(); ++c) {
    std::size_t actual = 0;
    for (std::size_t j = 0; j < cm.size(); ++j) actual += cm.count(c, j);
    if (actual == 0) {
      throw Error(ErrorCode::kUndefinedClass, "class " + std::to_string(cm.classes()[c]) + " has no true samples");
    }
    total += static_cast<double>(cm.count(c, c)) / static_cast<double>(actual);
  }
  return total / static_cast<double>(cm.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::kInvalidInput, "scores/labels length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] != 0) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorCode::kUndefinedClass, "ROC-AUC needs both classes present");
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

MacroAuc macro_ovr_auc(const Matrix& proba, std::span<const int> labels, std::span<const int> classes) {
  if (proba.rows() != labels.size() || proba.cols() != classes.size()) {
    throw Error(ErrorCode::kInvalidInput, "probability matrix does not match labels/classes");
  }
  MacroAuc out;
  std::vector<int> binary(labels.size());
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::size_t positives = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      binary[i] = labels[i] == classes[c] ? 1 : 0;
      positives += static_cast<std::size_t>(binary[i]);
    }
    if (positives == 0 || positives == labels.size()) {
      out.per_class.emplace_back();
      out.skipped_classes.push_back(classes[c]);
      spdlog::warn("macro AUC: class {} skipped (absent from one side)", classes[c]);
      continue;
    }
    const std::vector<double> scores = proba.column(c);
    const double auc = roc_auc(scores, binary);
    out.per_class.emplace_back(auc);
    sum += auc;
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::kUndefinedClass, "macro AUC: no class has both positives and negatives");
  out.value = sum / static_cast<double>(used);
  return out;
}

RegressionErrors mae_rmse(std::span<const double> truth, std::span<const double> predicted) {
  if (truth.size() != predicted.size() || truth.empty()) {
    throw Error(ErrorCode::kInvalidInput, "MAE/RMSE need equal non-zero lengths");
  }
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = truth[i] - predicted[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const double n = static_cast<double>(truth.size());
  const double mae = abs_sum / n;
  // RMSE >= MAE holds exactly; the max only absorbs rounding in the sums.
  return {mae, std::max(std::sqrt(sq_sum / n), mae)};
}

}  // namespace painbvp
