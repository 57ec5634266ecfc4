#pragma once

#include <optional>
#include <string>
#include <vector>

#include "painbvp/config.hpp"
#include "painbvp/evaluation.hpp"
#include "painbvp/learn/grid_search.hpp"
#include "painbvp/stats.hpp"

namespace painbvp {

enum class TaskKind { kClassification, kRegression };

/// A classification task over an ascending set of pain states ("NP-HP",
/// "LP-MP-HP", ...) or the 0-10 score regression ("regression").
struct Task {
  std::string name;
  TaskKind kind = TaskKind::kClassification;
  std::vector<PainState> states;
};

Task parse_task(std::string_view name);
/// The six pairwise tasks, the three-class LP-MP-HP task and regression.
std::vector<Task> standard_tasks();

/// Rows of the task; labels are PainState values (the stratification key
/// for regression), targets are pain scores.
struct TaskData {
  Matrix x;
  std::vector<int> labels;
  std::vector<double> targets;
  std::vector<std::string> groups;
};

/// Throws kInvalidConfiguration naming the first state with fewer rows than
/// `min_per_class`.
TaskData select_task(const Dataset& ds, const Task& task, std::size_t min_per_class);

/// Regression counterpart of a classification family (identity for
/// regression families).
learn::Family regression_family(learn::Family family);

struct StudyResult {
  Task task;
  learn::ModelSpec spec;
  std::optional<learn::GridSearchResult> search;
  std::size_t main_rows = 0;
  std::size_t tuning_rows = 0;
  std::vector<std::size_t> tuning_indices;  // rows of the task data held out for tuning
  EvalReport report;
};

/// Tuning holdout, grid search on it, then k-fold CV with in-fold SMOTE on
/// the remaining rows.
StudyResult run_task(const TaskData& data, const Task& task, const RunConfig& config);

/// Machine-readable report including the effective configuration.
std::string report_json(const StudyResult& result, const RunConfig& config);

struct ImportanceResult {
  Task task;
  std::vector<std::vector<double>> per_fold;  // one normalised vector per fold
  std::vector<double> mean;                   // averaged over folds
  std::vector<std::size_t> order;             // feature indices, descending mean
};

/// Extra-trees importance on the training part of each CV fold.
ImportanceResult fold_importance(const TaskData& data, const Task& task, const RunConfig& config);

/// `rank,feature,importance,top` rows sorted descending; `top` marks
/// importance above the threshold.
std::string importance_csv(const ImportanceResult& result, double threshold);

/// Dataset with per-subject normalisation applied if the config asks for it.
Dataset prepare_dataset(Dataset ds, const RunConfig& config);

}  // namespace painbvp
