#include <doctest.h>

#include <json.hpp>

#include <set>

#include "painbvp/study.hpp"
#include "support.hpp"

using namespace painbvp;
using testing::error_code_of;

namespace {

// Feature rows for 8 subjects where rr_mean_ms drops with pain state.
Dataset planted_dataset(std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  const std::array<int, 4> scores{0, 2, 5, 8};
  for (int subject = 0; subject < 8; ++subject) {
    for (std::size_t s = 0; s < 4; ++s) {
      for (int i = 0; i < 12; ++i) {
        LabeledWindow w;
        w.subject_id = "S" + std::to_string(subject + 1);
        w.window_start_s = 2.5 * static_cast<double>(i + 12 * static_cast<int>(s));
        w.pain_score = scores[s];
        w.pain_state = bin_pain(w.pain_score);
        for (double& v : w.features) v = rng.normal();
        w.features[feature_index("rr_mean_ms")] = 850.0 - 60.0 * static_cast<double>(s) + 8.0 * rng.normal();
        ds.rows.push_back(w);
      }
    }
  }
  return ds;
}

RunConfig quick_config() {
  RunConfig c;
  c.model.family = learn::Family::kGbt;
  c.model.grid = learn::HyperGrid{{"n_rounds", {20.0}}, {"max_depth", {2.0, 3.0}}};
  c.importance_trees = 30;
  return c;
}

}  // namespace

TEST_CASE("task parsing") {
  const auto t = parse_task("LP-MP-HP");
  CHECK(t.kind == TaskKind::kClassification);
  CHECK(t.states == std::vector<PainState>{PainState::kLP, PainState::kMP, PainState::kHP});
  CHECK(parse_task("regression").kind == TaskKind::kRegression);
  CHECK(standard_tasks().size() == 8);
  CHECK(error_code_of([] { parse_task("HP-NP"); }) == ErrorCode::kInvalidConfiguration);
  CHECK(error_code_of([] { parse_task("NP"); }) == ErrorCode::kInvalidConfiguration);
  CHECK(error_code_of([] { parse_task("NP-XP"); }) == ErrorCode::kInvalidConfiguration);
  CHECK(regression_family(learn::Family::kExtraTrees) == learn::Family::kRandomForestReg);
  CHECK(regression_family(learn::Family::kGbtReg) == learn::Family::kGbtReg);
}

TEST_CASE("task selection") {
  const auto ds = planted_dataset(1);
  const auto d = select_task(ds, parse_task("NP-HP"), 5);
  CHECK(d.x.rows() == 2 * 8 * 12);
  CHECK(d.x.cols() == 44);
  std::set<int> labels(d.labels.begin(), d.labels.end());
  CHECK(labels == std::set<int>{static_cast<int>(PainState::kNP), static_cast<int>(PainState::kHP)});
  CHECK(d.groups.size() == d.x.rows());
  CHECK(select_task(ds, parse_task("regression"), 5).x.rows() == ds.rows.size());
  CHECK(error_code_of([&] { select_task(ds, parse_task("NP-HP"), 1000); }) == ErrorCode::kInvalidConfiguration);
}

TEST_CASE("run_task holds out tuning rows and recovers the planted effect") {
  const auto ds = prepare_dataset(planted_dataset(2), RunConfig{});
  const auto cfg = quick_config();
  const Task task = parse_task("NP-HP");
  const auto data = select_task(ds, task, 5);
  const auto r = run_task(data, task, cfg);
  CHECK(r.main_rows + r.tuning_rows == data.x.rows());
  CHECK(r.tuning_rows == doctest::Approx(0.16 * static_cast<double>(data.x.rows())).epsilon(0.05));
  REQUIRE(r.search.has_value());
  CHECK(r.search->points.size() == 2);
  CHECK(r.report.folds.size() == 5);
  for (const auto& f : r.report.folds) {
    for (std::size_t i : f.test_indices) CHECK(i < r.main_rows);
  }
  CHECK(r.report.summary.at("roc_auc").mean >= 0.95);

  const auto again = run_task(data, task, cfg);
  CHECK(report_json(again, cfg) == report_json(r, cfg));

  const auto j = nlohmann::json::parse(report_json(r, cfg));
  CHECK(j["task"] == "NP-HP");
  CHECK(j["folds"].size() == 5);
  CHECK(j["config"]["seed"] == 1);
  CHECK(j["confusion_pooled"]["classes"].size() == 2);

  auto no_grid = cfg;
  no_grid.model.grid_search = false;
  CHECK_FALSE(run_task(data, task, no_grid).search.has_value());
}

TEST_CASE("regression task") {
  const auto ds = prepare_dataset(planted_dataset(3), RunConfig{});
  auto cfg = quick_config();
  cfg.model.grid_search = false;
  const Task task = parse_task("regression");
  const auto r = run_task(select_task(ds, task, 5), task, cfg);
  CHECK(r.spec.family == learn::Family::kGbtReg);
  CHECK(r.report.regression);
  CHECK(r.report.summary.at("mae").mean < r.report.summary.at("naive_mae").mean);
  const auto j = nlohmann::json::parse(report_json(r, cfg));
  CHECK(j.contains("benchmark"));

  auto reg_model = cfg;
  reg_model.model.family = learn::Family::kGbtReg;
  const Task cls = parse_task("NP-HP");
  CHECK(error_code_of([&] { run_task(select_task(ds, cls, 5), cls, reg_model); }) == ErrorCode::kInvalidConfiguration);
}

TEST_CASE("fold importance ranks the planted feature first") {
  const auto ds = prepare_dataset(planted_dataset(4), RunConfig{});
  const auto cfg = quick_config();
  const Task task = parse_task("NP-LP-MP-HP");
  const auto imp = fold_importance(select_task(ds, task, 5), task, cfg);
  CHECK(imp.per_fold.size() == 5);
  double sum = 0.0;
  for (double v : imp.mean) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(imp.order.front() == feature_index("rr_mean_ms"));
  const auto csv = importance_csv(imp, cfg.importance_threshold);
  CHECK(csv.rfind("rank,feature,importance,top\n1,rr_mean_ms,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 45);
}
