#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "painbvp/learn/model.hpp"
#include "painbvp/metrics.hpp"

namespace painbvp {

enum class CvMode { kWindow, kSubjectGrouped };

std::string_view to_string(CvMode mode);
CvMode cv_mode_from_string(std::string_view text);

struct CvOptions {
  std::size_t k = 5;
  std::size_t smote_k = 5;
  bool oversample = true;  // classification only
  CvMode mode = CvMode::kWindow;
  std::uint64_t seed = 1;
};

/// Classification uses `labels`; regression uses `targets` and stratifies
/// folds on `labels`. `groups` is required for subject-grouped folds.
struct CvData {
  const Matrix* x = nullptr;
  std::span<const int> labels;
  std::span<const double> targets;
  std::span<const std::string> groups;
};

struct FoldResult {
  bool failed = false;
  std::string error;
  std::vector<std::size_t> test_indices;  // rows of the input, never synthetic
  std::size_t train_rows = 0;
  std::size_t synthetic_rows = 0;
  std::map<std::string, double> metrics;
  std::optional<ConfusionMatrix> confusion;
};

struct MetricSummary {
  std::vector<double> values;  // successful folds in fold order
  double mean = 0.0;
  double std = 0.0;  // population std across folds
  std::string formatted;
};

struct EvalReport {
  learn::ModelSpec spec;
  bool regression = false;
  std::vector<int> classes;
  CvOptions options;
  std::vector<FoldResult> folds;
  std::map<std::string, MetricSummary> summary;
  std::optional<ConfusionMatrix> pooled_confusion;  // sum over folds
};

/// Per-fold: oversample the training portion (classification), fit, score
/// the untouched test fold. One failed fold is tolerated and reported; two
/// or more throw kRunFailed.
EvalReport cross_validate(const learn::ModelSpec& spec, const CvData& data, const CvOptions& options);

MetricSummary summarize(std::vector<double> values);

/// Confusion matrix as a delimited table: header `truth,<pred labels...>`.
std::string confusion_csv(const ConfusionMatrix& cm, std::span<const std::string> class_names);

}  // namespace painbvp
