#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "painbvp/learn/ensemble.hpp"
#include "painbvp/learn/grid_search.hpp"
#include "painbvp/learn/linear.hpp"
#include "painbvp/learn/model.hpp"
#include "painbvp/learn/tree.hpp"
#include "support.hpp"

using namespace painbvp;
using namespace painbvp::learn;
using testing::error_code_of;

namespace {

struct Labelled {
  Matrix x;
  std::vector<int> y;
};

Labelled blobs(std::size_t per_class, std::size_t classes, double spread, std::uint64_t seed) {
  Rng rng(seed);
  Labelled d{Matrix(0, 2), {}};
  for (std::size_t c = 0; c < classes; ++c) {
    const double cx = 6.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes));
    const double cy = 6.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes));
    for (std::size_t i = 0; i < per_class; ++i) {
      d.x.append_row(std::vector<double>{cx + spread * rng.normal(), cy + spread * rng.normal()});
      d.y.push_back(static_cast<int>(c));
    }
  }
  return d;
}

Labelled xor_grid() {
  Labelled d{Matrix(0, 2), {}};
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(-1.0, 1.0);
    const double b = rng.uniform(-1.0, 1.0);
    d.x.append_row(std::vector<double>{a, b});
    d.y.push_back((a > 0) != (b > 0) ? 1 : 0);
  }
  return d;
}

double train_accuracy(const Model& m, const Labelled& d) {
  const auto p = m.predict(d.x);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < p.size(); ++i) ok += p[i] == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(p.size());
}

void check_rows_sum_to_one(const Matrix& p) {
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double s = 0.0;
    for (double v : p.row(r)) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }
}

}  // namespace

TEST_CASE("family names and parameter resolution") {
  for (auto f : {Family::kLogReg, Family::kLinSvm, Family::kRandomForest, Family::kExtraTrees, Family::kAdaBoost,
                 Family::kGbt, Family::kLinReg, Family::kSvrLinear, Family::kRandomForestReg, Family::kAdaBoostReg,
                 Family::kGbtReg}) {
    CHECK(family_from_string(to_string(f)) == f);
    CHECK_FALSE(default_params(f).empty());
  }
  CHECK(is_regression(Family::kGbtReg));
  CHECK_FALSE(is_regression(Family::kGbt));
  CHECK(error_code_of([] { family_from_string("mlp"); }) == ErrorCode::kInvalidConfiguration);
  CHECK(error_code_of([] { resolve_params({Family::kGbt, {{"bogus", 1.0}}}); }) == ErrorCode::kInvalidConfiguration);
  CHECK(resolve_params({Family::kGbt, {{"max_depth", 5.0}}}).at("max_depth") == 5.0);
}

TEST_CASE("logistic gradient matches central differences") {
  const auto d = blobs(15, 3, 2.0, 2);
  const auto enc = encode_labels(d.y);
  const LogisticObjective obj(d.x, enc.codes, 3, 0.05);
  Rng rng(3);
  for (int point = 0; point < 20; ++point) {
    std::vector<double> w(obj.n_params()), g(obj.n_params()), scratch(obj.n_params());
    for (double& v : w) v = rng.normal();
    obj.evaluate(w, g);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double h = 1e-5;
      auto plus = w, minus = w;
      plus[i] += h;
      minus[i] -= h;
      const double fd = (obj.evaluate(plus, scratch) - obj.evaluate(minus, scratch)) / (2.0 * h);
      CHECK(std::abs(fd - g[i]) < 1e-5);
    }
  }
}

TEST_CASE("logistic regression") {
  const auto sep = blobs(30, 2, 0.5, 4);
  const auto m = fit_logistic(sep.x, sep.y, 1e-4, 500, 1e-8);
  CHECK(train_accuracy(*m, sep) == 1.0);
  check_rows_sum_to_one(m->predict_proba(sep.x));

  auto skewed = blobs(30, 2, 1.0, 5);
  for (int i = 0; i < 10; ++i) {
    skewed.x.append_row(std::vector<double>{6.0, 0.0});
    skewed.y.push_back(0);
  }
  const auto heavy = fit_logistic(skewed.x, skewed.y, 1e6, 500, 1e-10);
  double norm = 0.0;
  for (double v : heavy->state().weights.data()) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-3);
  const auto p = heavy->predict_proba(skewed.x);
  for (std::size_t r = 0; r < p.rows(); ++r) CHECK(std::abs(p(r, 0) - 40.0 / 70.0) < 1e-3);

  CHECK(error_code_of([&] { fit_logistic(sep.x, std::vector<int>(sep.y.size(), 1), 1.0, 10, 1e-6); }) ==
        ErrorCode::kInvalidInput);
}

TEST_CASE("linear SVM") {
  Labelled d{Matrix(0, 2), {}};
  Rng rng(6);
  for (int i = 0; i < 60; ++i) {
    const int y = i % 2;
    const double side = y ? 1.0 : -1.0;
    d.x.append_row(std::vector<double>{side * rng.uniform(1.5, 5.0), rng.uniform(-3.0, 3.0)});
    d.y.push_back(y);
  }
  const auto m = fit_linear_svm(d.x, d.y, 10.0, 200, 7);
  CHECK(train_accuracy(*m, d) == 1.0);
  check_rows_sum_to_one(m->predict_proba(d.x));

  Matrix probe(0, 2);
  for (double x0 : {0.5, 1.0, 2.0, 4.0, 8.0}) probe.append_row(std::vector<double>{x0, 0.0});
  const auto margins = m->decision_function(probe);
  for (std::size_t r = 1; r < probe.rows(); ++r) CHECK(margins(r, 0) > margins(r - 1, 0));

  const auto tiny = fit_linear_svm(d.x, d.y, 1e-9, 50, 7);
  for (double v : tiny->state().weights.data()) CHECK(std::abs(v) < 1e-6);

  const auto tri = blobs(20, 3, 0.5, 8);
  const auto ovr = fit_linear_svm(tri.x, tri.y, 10.0, 200, 9);
  CHECK(train_accuracy(*ovr, tri) == 1.0);
  check_rows_sum_to_one(ovr->predict_proba(tri.x));
}

TEST_CASE("SVM objective decreases on average") {
  const auto d = blobs(40, 2, 2.5, 10);
  std::vector<int> signs;
  for (int y : d.y) signs.push_back(y ? 1 : -1);
  const auto r = train_pegasos(d.x, signs, 1.0, 60, 11);
  REQUIRE(r.epoch_objective.size() == 60);
  const auto avg = [&](std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += r.epoch_objective[i];
    return s / static_cast<double>(to - from);
  };
  CHECK(avg(50, 60) <= avg(0, 10));
}

TEST_CASE("random forest") {
  Rng rng(12);
  Labelled d{Matrix(0, 3), {}};
  for (int i = 0; i < 80; ++i) {
    d.x.append_row(std::vector<double>{rng.normal(), rng.normal(), rng.normal()});
    d.y.push_back(static_cast<int>(rng.index(3)));
  }
  ForestOptions opt;
  opt.n_trees = 30;
  opt.max_features = 3;
  const auto m = fit_random_forest(d.x, d.y, opt, 13);
  // Bootstrap samples leave some rows out of each tree; the forest vote still memorises.
  CHECK(train_accuracy(*m, d) == 1.0);
  check_rows_sum_to_one(m->predict_proba(d.x));
  CHECK(fit_random_forest(d.x, d.y, opt, 13)->predict_proba(d.x).data() == m->predict_proba(d.x).data());

  Labelled flat{Matrix(10, 2, 1.0), {0, 1, 1, 1, 0, 1, 1, 0, 1, 1}};
  const auto maj = fit_random_forest(flat.x, flat.y, opt, 14);
  for (int p : maj->predict(flat.x)) CHECK(p == 1);
}

TEST_CASE("extra-trees importance") {
  Rng rng(15);
  Matrix x(0, 5);
  std::vector<int> y;
  for (int i = 0; i < 150; ++i) {
    const int label = static_cast<int>(rng.index(3));
    y.push_back(label);
    x.append_row(std::vector<double>{rng.normal(), rng.normal(), static_cast<double>(label), 4.0, rng.normal()});
  }
  const auto imp = extra_trees_importance(x, y, 50, 16);
  double sum = 0.0;
  for (double v : imp) sum += v;
  CHECK(std::abs(sum - 1.0) <= 1e-9);
  CHECK(imp[3] == 0.0);
  CHECK(std::max_element(imp.begin(), imp.end()) - imp.begin() == 2);
}

TEST_CASE("AdaBoost") {
  Labelled line{Matrix(0, 1), {}};
  for (int i = 0; i < 40; ++i) {
    line.x.append_row(std::vector<double>{static_cast<double>(i)});
    line.y.push_back(i >= 23 ? 1 : 0);
  }
  BoostTrace trace;
  const auto m = fit_adaboost(line.x, line.y, 10, 1, 17, &trace);
  CHECK(train_accuracy(*m, line) == 1.0);
  check_rows_sum_to_one(m->predict_proba(line.x));

  const auto x = xor_grid();
  BoostTrace xt;
  const auto stumps = fit_adaboost(x.x, x.y, 50, 1, 18, &xt);
  CHECK(train_accuracy(*stumps, x) < 1.0);
  for (double s : xt.weight_sums) CHECK(std::abs(s - 1.0) <= 1e-9);
  for (double s : trace.weight_sums) CHECK(std::abs(s - 1.0) <= 1e-9);
}

TEST_CASE("gradient boosting") {
  Matrix grid(0, 1);
  std::vector<double> target;
  for (int i = 0; i <= 100; ++i) {
    grid.append_row(std::vector<double>{i / 100.0});
    target.push_back(i / 100.0);
  }
  GbtOptions reg;
  reg.n_rounds = 200;
  reg.learning_rate = 0.1;
  reg.max_depth = 3;
  GbtTrace trace;
  const auto fit = fit_gbt_reg(grid, target, reg, 19, &trace);
  const auto pred = fit->predict_value(grid);
  double mae = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) mae += std::abs(pred[i] - target[i]);
  CHECK(mae / static_cast<double>(pred.size()) < 0.02);
  for (std::size_t r = 1; r < trace.training_loss.size(); ++r) CHECK(trace.training_loss[r] <= trace.training_loss[r - 1] + 1e-12);

  GbtOptions stiff = reg;
  stiff.l2_leaf_lambda = 1e9;
  const auto flat = fit_gbt_reg(grid, target, stiff, 19);
  for (double v : flat->predict_value(grid)) CHECK(std::abs(v - flat->state().boosters[0].base_score) < 1e-6);

  const auto x = xor_grid();
  GbtOptions cls;
  cls.n_rounds = 100;
  cls.max_depth = 2;
  GbtTrace ct;
  const auto xm = fit_gbt(x.x, x.y, cls, 20, &ct);
  CHECK(train_accuracy(*xm, x) >= 0.95);
  check_rows_sum_to_one(xm->predict_proba(x.x));
  for (std::size_t r = 1; r < ct.training_loss.size(); ++r) CHECK(ct.training_loss[r] <= ct.training_loss[r - 1] + 1e-12);

  const auto tri = blobs(20, 3, 2.0, 21);
  GbtOptions three;
  three.n_rounds = 30;
  three.learning_rate = 0.3;
  GbtTrace tt;
  const auto tm = fit_gbt(tri.x, tri.y, three, 22, &tt);
  check_rows_sum_to_one(tm->predict_proba(tri.x));
  for (std::size_t r = 1; r < tt.training_loss.size(); ++r) CHECK(tt.training_loss[r] <= tt.training_loss[r - 1] + 1e-12);
}

// Thresholds are midpoints, so only rows every tree was fitted on are routed identically;
// bagged forests are left out for that reason.
TEST_CASE("boosted trees ignore strictly monotone feature transforms") {
  const auto d = blobs(25, 3, 2.5, 23);
  Matrix warped = d.x;
  for (std::size_t r = 0; r < warped.rows(); ++r) warped(r, 1) = std::exp(0.5 * warped(r, 1)) + 3.0;
  for (const std::string name : {"adaboost", "gbt"}) {
    CAPTURE(name);
    const ModelSpec spec{family_from_string(name), {}};
    const auto plain = fit_classifier(spec, d.x, d.y, 25);
    const auto bent = fit_classifier(spec, warped, d.y, 25);
    CHECK(plain->predict_proba(d.x).data() == bent->predict_proba(warped).data());
  }
}

TEST_CASE("every classifier family yields normalised probabilities and is deterministic") {
  const auto d = blobs(20, 3, 2.0, 26);
  for (const char* name : {"logreg", "linsvm", "rforest", "extratrees", "adaboost", "gbt"}) {
    CAPTURE(name);
    const ModelSpec spec{family_from_string(name), {}};
    const auto a = fit_classifier(spec, d.x, d.y, 27);
    const auto b = fit_classifier(spec, d.x, d.y, 27);
    check_rows_sum_to_one(a->predict_proba(d.x));
    CHECK(a->predict_proba(d.x).data() == b->predict_proba(d.x).data());
    for (int p : a->predict(d.x)) CHECK((p >= 0 && p <= 2));
  }
}

TEST_CASE("serialisation round trip is bit exact") {
  const auto d = blobs(20, 3, 2.0, 28);
  std::vector<double> t;
  for (std::size_t r = 0; r < d.x.rows(); ++r) t.push_back(d.x(r, 0) * 0.3 + d.x(r, 1));
  for (const char* name : {"logreg", "linsvm", "rforest", "extratrees", "adaboost", "gbt"}) {
    CAPTURE(name);
    const auto m = fit_classifier({family_from_string(name), {}}, d.x, d.y, 29);
    const auto back = deserialize_model(serialize_model(*m));
    CHECK(back->family() == m->family());
    CHECK(back->predict_proba(d.x).data() == m->predict_proba(d.x).data());
  }
  for (const char* name : {"linreg", "svr_linear", "rforest_reg", "adaboost_reg", "gbt_reg"}) {
    CAPTURE(name);
    const auto m = fit_regressor({family_from_string(name), {}}, d.x, t, 30);
    const auto back = deserialize_model(serialize_model(*m));
    CHECK(back->predict_value(d.x) == m->predict_value(d.x));
  }
  CHECK(error_code_of([] { deserialize_model("{\"format\": \"other\"}"); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("regressors fit a linear target") {
  Rng rng(31);
  Matrix x(0, 2);
  std::vector<double> y;
  for (int i = 0; i < 120; ++i) {
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    x.append_row(std::vector<double>{a, b});
    y.push_back(1.5 * a - 0.5 * b + 2.0);
  }
  const auto lin = fit_linreg(x, y, 1e-8);
  CHECK(lin->state().weights[0] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(lin->state().intercept == doctest::Approx(2.0).epsilon(1e-6));
  for (const char* name : {"svr_linear", "rforest_reg", "adaboost_reg", "gbt_reg"}) {
    CAPTURE(name);
    const auto m = fit_regressor({family_from_string(name), {}}, x, y, 32);
    const auto p = m->predict_value(x);
    double mae = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) mae += std::abs(p[i] - y[i]);
    CHECK(mae / static_cast<double>(p.size()) < 0.5);
  }
}

TEST_CASE("grid search") {
  const auto d = blobs(30, 2, 3.0, 33);
  const auto tune = blobs(15, 2, 3.0, 34);
  SearchData data{&d.x, &tune.x, d.y, tune.y, {}, {}};

  const auto single = grid_search(Family::kGbt, {{"max_depth", {2.0}}}, data, 1);
  CHECK(single.best.at("max_depth") == 2.0);
  CHECK(single.points.size() == 1);

  CHECK(enumerate_grid({{"a", {1, 2}}, {"b", {3, 4, 5}}}).size() == 6);
  CHECK(enumerate_grid({{"a", {1, 2}}, {"b", {3, 4, 5}}})[1].at("b") == 4.0);

  // Only depth >= 2 can represent XOR; depth 1 stumps cannot.
  const auto x = xor_grid();
  Labelled xt = xor_grid();
  Rng rng(35);
  for (std::size_t r = 0; r < xt.x.rows(); ++r) {
    xt.x(r, 0) = rng.uniform(-1.0, 1.0);
    xt.x(r, 1) = rng.uniform(-1.0, 1.0);
    xt.y[r] = (xt.x(r, 0) > 0) != (xt.x(r, 1) > 0) ? 1 : 0;
  }
  SearchData xor_data{&x.x, &xt.x, x.y, xt.y, {}, {}};
  const HyperGrid depths{{"max_depth", {1.0, 3.0}}, {"n_rounds", {50.0}}};
  const auto planted = grid_search(Family::kGbt, depths, xor_data, 2);
  CHECK(planted.best.at("max_depth") == 3.0);
  CHECK(planted.metric == "f1_macro");
  const auto again = grid_search(Family::kGbt, depths, xor_data, 2);
  CHECK(again.best == planted.best);
  CHECK(again.best_score == planted.best_score);

  CHECK(error_code_of([&] { grid_search(Family::kGbt, {{"learning_rate", {-1.0}}}, data, 1); }) == ErrorCode::kSearchFailed);
  CHECK_FALSE(default_grid(Family::kGbt).empty());
}
