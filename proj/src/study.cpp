#include "painbvp/study.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>

#include "painbvp/error.hpp"
#include "painbvp/io.hpp"
#include "painbvp/learn/ensemble.hpp"
#include "painbvp/rng.hpp"

namespace painbvp {

using nlohmann::json;

Task parse_task(std::string_view name) {
  Task t;
  t.name = std::string(name);
  if (name == "regression") {
    t.kind = TaskKind::kRegression;
    t.states.assign(kPainStates.begin(), kPainStates.end());
    return t;
  }
  std::size_t start = 0;
  while (start <= name.size()) {
    const std::size_t dash = name.find('-', start);
    const std::string_view part = name.substr(start, dash == std::string_view::npos ? std::string_view::npos : dash - start);
    PainState s;
    try {
      s = pain_state_from_string(part);
    } catch (const Error&) {
      throw Error(ErrorCode::kInvalidConfiguration, "unknown task '" + t.name + "'");
    }
    if (!t.states.empty() && static_cast<int>(s) <= static_cast<int>(t.states.back())) {
      throw Error(ErrorCode::kInvalidConfiguration, "task '" + t.name + "': states must be listed in ascending order");
    }
    t.states.push_back(s);
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  if (t.states.size() < 2) throw Error(ErrorCode::kInvalidConfiguration, "task '" + t.name + "' needs two states");
  return t;
}

std::vector<Task> standard_tasks() {
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < kPainStates.size(); ++i) {
    for (std::size_t j = i + 1; j < kPainStates.size(); ++j) {
      tasks.push_back(parse_task(std::string(to_string(kPainStates[i])) + "-" + std::string(to_string(kPainStates[j]))));
    }
  }
  tasks.push_back(parse_task("LP-MP-HP"));
  tasks.push_back(parse_task("regression"));
  return tasks;
}

TaskData select_task(const Dataset& ds, const Task& task, std::size_t min_per_class) {
  TaskData d;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const auto& r = ds.rows[i];
    if (r.is_synthetic) continue;
    if (std::find(task.states.begin(), task.states.end(), r.pain_state) == task.states.end()) continue;
    rows.push_back(i);
  }
  for (PainState s : task.states) {
    const auto n = static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [&](std::size_t i) {
      return ds.rows[i].pain_state == s;
    }));
    if (n < min_per_class) {
      throw Error(ErrorCode::kInvalidConfiguration, "task '" + task.name + "' is not stratifiable: class " +
                                                        std::string(to_string(s)) + " has " + std::to_string(n) +
                                                        " rows, needs " + std::to_string(min_per_class));
    }
  }
  d.x = Matrix(rows.size(), kFeatureCount);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = ds.rows[rows[k]];
    std::copy(r.features.begin(), r.features.end(), d.x.row(k).begin());
    d.labels.push_back(static_cast<int>(r.pain_state));
    d.targets.push_back(static_cast<double>(r.pain_score));
    d.groups.push_back(r.subject_id);
  }
  return d;
}

learn::Family regression_family(learn::Family family) {
  using learn::Family;
  switch (family) {
    case Family::kLogReg:
      return Family::kLinReg;
    case Family::kLinSvm:
      return Family::kSvrLinear;
    case Family::kRandomForest:
    case Family::kExtraTrees:
      return Family::kRandomForestReg;
    case Family::kAdaBoost:
      return Family::kAdaBoostReg;
    case Family::kGbt:
      return Family::kGbtReg;
    default:
      return family;
  }
}

namespace {

learn::HyperParams keep_known(learn::Family family, const learn::HyperParams& params) {
  const learn::HyperParams defaults = learn::default_params(family);
  learn::HyperParams out;
  for (const auto& [k, v] : params) {
    if (defaults.count(k)) out[k] = v;
  }
  return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace

StudyResult run_task(const TaskData& data, const Task& task, const RunConfig& config) {
  StudyResult res;
  res.task = task;
  const bool regression = task.kind == TaskKind::kRegression;
  learn::Family family = config.model.family;
  if (regression) {
    family = regression_family(family);
  } else if (learn::is_regression(family)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "model '" + std::string(learn::to_string(family)) + "' cannot run classification task " + task.name);
  }
  learn::HyperParams base = keep_known(family, config.model.params);

  const SplitIndices split = tuning_split(data.labels, config.tuning_fraction, derive_seed(config.seed, 11));
  res.main_rows = split.main.size();
  res.tuning_rows = split.tuning.size();
  res.tuning_indices = split.tuning;
  const Matrix x_main = data.x.select_rows(split.main);
  const std::vector<int> y_main = pick(data.labels, split.main);
  const std::vector<double> t_main = pick(data.targets, split.main);
  const std::vector<std::string> g_main = pick(data.groups, split.main);

  if (config.model.grid_search && !split.tuning.empty()) {
    learn::HyperGrid grid = config.model.grid ? *config.model.grid : learn::default_grid(family);
    // Fixed parameters not searched over are carried into every point.
    for (const auto& [k, v] : base) {
      if (!grid.count(k)) grid[k] = {v};
    }
    const Matrix x_tune = data.x.select_rows(split.tuning);
    const std::vector<int> y_tune = pick(data.labels, split.tuning);
    const std::vector<double> t_tune = pick(data.targets, split.tuning);
    Matrix x_fit = x_main;
    std::vector<int> y_fit = y_main;
    if (!regression && config.cv.oversample) {
      SmoteResult sm = smote(x_main, y_main, config.cv.smote_k, derive_seed(config.seed, 12));
      x_fit = std::move(sm.features);
      y_fit = std::move(sm.labels);
    }
    learn::SearchData sd;
    sd.train_x = &x_fit;
    sd.tuning_x = &x_tune;
    sd.train_labels = y_fit;
    sd.tuning_labels = y_tune;
    sd.train_targets = t_main;
    sd.tuning_targets = t_tune;
    res.search = learn::grid_search(family, grid, sd, derive_seed(config.seed, 13));
    base = res.search->best;
    spdlog::info("task {}: grid search picked {} = {:.4f}", task.name, res.search->metric, res.search->best_score);
  }
  res.spec = {family, base};

  CvOptions cv = config.cv;
  cv.seed = derive_seed(config.seed, 14);
  CvData cd;
  cd.x = &x_main;
  cd.labels = y_main;
  cd.targets = t_main;
  cd.groups = g_main;
  res.report = cross_validate(res.spec, cd, cv);
  return res;
}

namespace {

json summary_json(const MetricSummary& s) {
  return {{"values", s.values}, {"mean", s.mean}, {"std", s.std}, {"formatted", s.formatted}};
}

}  // namespace

std::string report_json(const StudyResult& r, const RunConfig& config) {
  json j;
  j["task"] = r.task.name;
  j["kind"] = r.task.kind == TaskKind::kRegression ? "regression" : "classification";
  std::vector<std::string> states;
  for (PainState s : r.task.states) states.emplace_back(to_string(s));
  j["states"] = states;
  j["family"] = std::string(learn::to_string(r.spec.family));
  j["params"] = learn::resolve_params(r.spec);
  j["rows"] = {{"main", r.main_rows}, {"tuning", r.tuning_rows}};
  if (r.search) {
    json points = json::array();
    for (const auto& p : r.search->points) {
      json pj = {{"params", p.params}};
      pj["score"] = p.score ? json(*p.score) : json(nullptr);
      if (!p.error.empty()) pj["error"] = p.error;
      points.push_back(pj);
    }
    j["grid_search"] = {{"metric", r.search->metric}, {"best_score", r.search->best_score}, {"best", r.search->best},
                        {"points", points}};
  } else {
    j["grid_search"] = nullptr;
  }
  const EvalReport& e = r.report;
  j["cv"] = {{"k", e.options.k},
             {"mode", std::string(to_string(e.options.mode))},
             {"smote_k", e.options.smote_k},
             {"oversample", e.options.oversample && !e.regression}};
  json folds = json::array();
  for (std::size_t f = 0; f < e.folds.size(); ++f) {
    const FoldResult& fr = e.folds[f];
    json fj = {{"index", f},
               {"failed", fr.failed},
               {"train_rows", fr.train_rows},
               {"synthetic_rows", fr.synthetic_rows},
               {"test_rows", fr.test_indices.size()},
               {"metrics", fr.metrics}};
    if (fr.failed) fj["error"] = fr.error;
    folds.push_back(fj);
  }
  j["folds"] = folds;
  json metrics = json::object();
  json benchmark = json::object();
  for (const auto& [name, s] : e.summary) {
    if (name.rfind("naive_", 0) == 0) {
      benchmark[name.substr(6)] = summary_json(s);
    } else {
      metrics[name] = summary_json(s);
    }
  }
  j["metrics"] = metrics;
  if (e.regression) j["benchmark"] = {{"naive_p5", benchmark}};
  if (e.pooled_confusion) {
    std::vector<std::vector<std::size_t>> counts;
    for (std::size_t t = 0; t < e.pooled_confusion->size(); ++t) {
      counts.emplace_back();
      for (std::size_t p = 0; p < e.pooled_confusion->size(); ++p) counts.back().push_back(e.pooled_confusion->count(t, p));
    }
    std::vector<std::string> names;
    for (int c : e.pooled_confusion->classes()) names.emplace_back(to_string(static_cast<PainState>(c)));
    j["confusion_pooled"] = {{"classes", names}, {"counts", counts}};
  }
  j["config"] = json::parse(config_to_json(config));
  return j.dump(2) + "\n";
}

ImportanceResult fold_importance(const TaskData& data, const Task& task, const RunConfig& config) {
  ImportanceResult res;
  res.task = task;
  const auto folds = stratified_kfold(data.labels, config.cv.k, derive_seed(config.seed, 21));
  res.per_fold.resize(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<char> is_test(data.x.rows(), 0);
    for (std::size_t i : folds[f]) is_test[i] = 1;
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < data.x.rows(); ++i) {
      if (!is_test[i]) train.push_back(i);
    }
    res.per_fold[f] = learn::extra_trees_importance(data.x.select_rows(train), pick(data.labels, train),
                                                    config.importance_trees, derive_seed(config.seed, 22 + f));
  }
  res.mean.assign(kFeatureCount, 0.0);
  for (const auto& v : res.per_fold) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) res.mean[j] += v[j] / static_cast<double>(res.per_fold.size());
  }
  res.order.resize(kFeatureCount);
  std::iota(res.order.begin(), res.order.end(), 0);
  std::stable_sort(res.order.begin(), res.order.end(),
                   [&](std::size_t a, std::size_t b) { return res.mean[a] > res.mean[b]; });
  return res;
}

std::string importance_csv(const ImportanceResult& r, double threshold) {
  std::string out = "rank,feature,importance,top\n";
  for (std::size_t k = 0; k < r.order.size(); ++k) {
    const std::size_t j = r.order[k];
    out += std::to_string(k + 1) + "," + std::string(feature_names()[j]) + "," + format_double(r.mean[j]) + "," +
           (r.mean[j] > threshold ? "true" : "false") + "\n";
  }
  return out;
}

Dataset prepare_dataset(Dataset ds, const RunConfig& config) {
  if (config.normalize_per_subject) normalize_per_subject(ds);
  return ds;
}

}  // namespace painbvp
