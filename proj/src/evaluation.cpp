#include "painbvp/evaluation.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <numeric>

#include "painbvp/dataset.hpp"
#include "painbvp/error.hpp"
#include "painbvp/parallel.hpp"
#include "painbvp/rng.hpp"

namespace painbvp {

std::string_view to_string(CvMode mode) { return mode == CvMode::kWindow ? "window" : "subject-grouped"; }

CvMode cv_mode_from_string(std::string_view text) {
  if (text == "window") return CvMode::kWindow;
  if (text == "subject-grouped") return CvMode::kSubjectGrouped;
  throw Error(ErrorCode::kInvalidConfiguration, "unknown CV mode '" + std::string(text) + "'");
}

MetricSummary summarize(std::vector<double> values) {
  MetricSummary s;
  s.values = std::move(values);
  if (!s.values.empty()) {
    const double n = static_cast<double>(s.values.size());
    s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / n);
  }
  s.formatted = fmt::format("{:.4f} ± {:.4f}", s.mean, s.std);
  return s;
}

namespace {

void score_classifier(const learn::Model& model, const Matrix& x_test, std::span<const int> y_test, FoldResult& fold) {
  const Matrix proba = model.predict_proba(x_test);
  const std::vector<int> pred = model.predict(x_test);
  ConfusionMatrix cm = ConfusionMatrix::from_predictions(model.classes(), y_test, pred);
  double precision = 0.0;
  double recall = 0.0;
  for (std::size_t c = 0; c < cm.size(); ++c) {
    const auto prf = precision_recall_f1(cm, c);
    precision += prf.precision;
    recall += prf.recall;
  }
  fold.metrics["accuracy"] = accuracy(cm);
  fold.metrics["balanced_accuracy"] = balanced_accuracy(cm);
  fold.metrics["f1_macro"] = f1_macro(cm);
  fold.metrics["precision_macro"] = precision / static_cast<double>(cm.size());
  fold.metrics["recall_macro"] = recall / static_cast<double>(cm.size());
  if (model.classes().size() == 2) {
    std::vector<int> positive(y_test.size());
    for (std::size_t i = 0; i < y_test.size(); ++i) positive[i] = y_test[i] == model.classes()[1] ? 1 : 0;
    fold.metrics["roc_auc"] = roc_auc(proba.column(1), positive);
  } else {
    fold.metrics["roc_auc"] = macro_ovr_auc(proba, y_test, model.classes()).value;
  }
  fold.confusion = std::move(cm);
}

}  // namespace

EvalReport cross_validate(const learn::ModelSpec& spec, const CvData& data, const CvOptions& options) {
  if (data.x == nullptr) throw Error(ErrorCode::kInvalidInput, "cross-validation needs a feature matrix");
  const Matrix& x = *data.x;
  const bool regression = learn::is_regression(spec.family);
  if (data.labels.size() != x.rows() || (regression && data.targets.size() != x.rows())) {
    throw Error(ErrorCode::kInvalidInput, "cross-validation inputs differ in length");
  }
  learn::resolve_params(spec);

  EvalReport report;
  report.spec = spec;
  report.regression = regression;
  report.options = options;
  if (!regression) report.classes = learn::encode_labels(data.labels).classes;

  std::vector<std::vector<std::size_t>> folds;
  if (options.mode == CvMode::kSubjectGrouped) {
    if (data.groups.size() != x.rows()) throw Error(ErrorCode::kInvalidInput, "subject-grouped CV needs groups");
    folds = stratified_group_kfold(data.labels, data.groups, options.k, options.seed);
  } else {
    folds = stratified_kfold(data.labels, options.k, options.seed);
  }

  report.folds.resize(folds.size());
  parallel_for(folds.size(), [&](std::size_t f) {
    FoldResult& fold = report.folds[f];
    fold.test_indices = folds[f];
    std::vector<char> is_test(x.rows(), 0);
    for (std::size_t i : folds[f]) is_test[i] = 1;
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (!is_test[i]) train.push_back(i);
    }
    const Matrix x_test = x.select_rows(folds[f]);
    const std::uint64_t fold_seed = derive_seed(options.seed, 100 + f);
    try {
      if (regression) {
        const Matrix x_train = x.select_rows(train);
        std::vector<double> y_train, y_test;
        for (std::size_t i : train) y_train.push_back(data.targets[i]);
        for (std::size_t i : folds[f]) y_test.push_back(data.targets[i]);
        fold.train_rows = train.size();
        const auto model = learn::fit_regressor(spec, x_train, y_train, fold_seed);
        const auto pred = model->predict_value(x_test);
        const RegressionErrors err = mae_rmse(y_test, pred);
        const std::vector<double> naive(y_test.size(), 5.0);
        const RegressionErrors base = mae_rmse(y_test, naive);
        fold.metrics["mae"] = err.mae;
        fold.metrics["rmse"] = err.rmse;
        fold.metrics["naive_mae"] = base.mae;
        fold.metrics["naive_rmse"] = base.rmse;
      } else {
        std::vector<int> y_train, y_test;
        for (std::size_t i : train) y_train.push_back(data.labels[i]);
        for (std::size_t i : folds[f]) y_test.push_back(data.labels[i]);
        Matrix x_train = x.select_rows(train);
        if (options.oversample) {
          SmoteResult sm = smote(x_train, y_train, options.smote_k, derive_seed(fold_seed, 1));
          fold.synthetic_rows = sm.parents.size();
          x_train = std::move(sm.features);
          y_train = std::move(sm.labels);
        }
        fold.train_rows = x_train.rows();
        const auto model = learn::fit_classifier(spec, x_train, y_train, fold_seed);
        score_classifier(*model, x_test, y_test, fold);
      }
    } catch (const Error& e) {
      fold.failed = true;
      fold.error = e.what();
      fold.metrics.clear();
      fold.confusion.reset();
    }
  });

  std::size_t failures = 0;
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    if (report.folds[f].failed) {
      ++failures;
      spdlog::warn("fold {} failed: {}", f, report.folds[f].error);
    }
  }
  if (failures >= 2) {
    throw Error(ErrorCode::kRunFailed, std::to_string(failures) + " folds failed; first: " +
                                           std::find_if(report.folds.begin(), report.folds.end(),
                                                        [](const FoldResult& r) { return r.failed; })
                                               ->error);
  }

  std::map<std::string, std::vector<double>> values;
  for (const auto& fold : report.folds) {
    for (const auto& [name, v] : fold.metrics) values[name].push_back(v);
    if (fold.confusion) {
      if (!report.pooled_confusion) report.pooled_confusion.emplace(fold.confusion->classes());
      report.pooled_confusion->merge(*fold.confusion);
    }
  }
  for (auto& [name, v] : values) report.summary[name] = summarize(std::move(v));
  return report;
}

std::string confusion_csv(const ConfusionMatrix& cm, std::span<const std::string> class_names) {
  if (class_names.size() != cm.size()) throw Error(ErrorCode::kInvalidInput, "class name count mismatch");
  std::string out = "truth";
  for (const auto& name : class_names) out += "," + name;
  out += "\n";
  for (std::size_t t = 0; t < cm.size(); ++t) {
    out += class_names[t];
    for (std::size_t p = 0; p < cm.size(); ++p) out += "," + std::to_string(cm.count(t, p));
    out += "\n";
  }
  return out;
}

}  // namespace painbvp
