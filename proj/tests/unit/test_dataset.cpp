#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "painbvp/dataset.hpp"
#include "support.hpp"

using namespace painbvp;
using testing::error_code_of;

namespace {

SubjectRecording recording(double seconds, std::vector<int> scores = {0, 3, 5, 8}) {
  SubjectRecording rec{"S01", SampledSignal(64.0, std::vector<double>(static_cast<std::size_t>(seconds * 64.0), 0.0)), {}};
  for (std::size_t i = 0; i < scores.size(); ++i) rec.epochs.push_back({20.0 * static_cast<double>(i), scores[i]});
  return rec;
}

LabeledWindow row(const std::string& subject, Rng& rng, double scale, double offset) {
  LabeledWindow w;
  w.subject_id = subject;
  for (double& v : w.features) v = offset + scale * rng.normal();
  return w;
}

std::vector<int> labels_with_counts(std::vector<std::size_t> counts) {
  std::vector<int> labels;
  for (std::size_t c = 0; c < counts.size(); ++c) labels.insert(labels.end(), counts[c], static_cast<int>(c));
  return labels;
}

// Distance from p to the segment [a, b].
double segment_distance(std::span<const double> p, std::span<const double> a, std::span<const double> b) {
  double ab2 = 0.0, t = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ab2 += (b[i] - a[i]) * (b[i] - a[i]);
    t += (p[i] - a[i]) * (b[i] - a[i]);
  }
  t = ab2 > 0.0 ? std::clamp(t / ab2, 0.0, 1.0) : 0.0;
  double d2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = a[i] + t * (b[i] - a[i]);
    d2 += (p[i] - q) * (p[i] - q);
  }
  return std::sqrt(d2);
}

}  // namespace

TEST_CASE("feature names") {
  CHECK(feature_names().size() == 44);
  CHECK(feature_names()[0] == "rmssd_ms");
  CHECK(feature_names()[20] == "mean");
  CHECK(feature_index("rr_mean_ms") == 5);
  CHECK(Dataset().column_names.size() == 44);
}

TEST_CASE("pain binning") {
  CHECK(bin_pain(0) == PainState::kNP);
  CHECK(bin_pain(1) == PainState::kLP);
  CHECK(bin_pain(3) == PainState::kLP);
  CHECK(bin_pain(4) == PainState::kMP);
  CHECK(bin_pain(6) == PainState::kMP);
  CHECK(bin_pain(7) == PainState::kHP);
  CHECK(bin_pain(10) == PainState::kHP);
  CHECK(error_code_of([] { bin_pain(11); }) == ErrorCode::kInvalidInput);
  CHECK(error_code_of([] { bin_pain(-1); }) == ErrorCode::kInvalidInput);
  for (auto s : kPainStates) CHECK(pain_state_from_string(to_string(s)) == s);
}

TEST_CASE("window segmentation") {
  CHECK(segment_windows(recording(220.0)).size() == 87);
  CHECK(segment_windows(recording(5.0)).size() == 1);
  CHECK(segment_windows(recording(4.0)).empty());
  const auto w = segment_windows(recording(220.0));
  CHECK(w[1].start_s == doctest::Approx(2.5));
  CHECK(w[1].begin == 160);
  CHECK(w[1].length == 320);
  CHECK(error_code_of([] { segment_windows(recording(20.0), 0.0); }) == ErrorCode::kInvalidParameter);
  CHECK(error_code_of([] { segment_windows(recording(20.0), 5.0, 1.0); }) == ErrorCode::kInvalidParameter);
}

TEST_CASE("window labels follow the centre") {
  const std::vector<EpochReport> epochs{{0.0, 0}, {20.0, 4}, {40.0, 7}};
  CHECK(label_window(0.0, 5.0, epochs) == 0);
  CHECK(label_window(17.5, 5.0, epochs) == 4);
  CHECK(label_window(15.0, 5.0, epochs) == 0);
  CHECK(label_window(40.0, 5.0, epochs) == 7);
  CHECK(error_code_of([&] { label_window(60.0, 5.0, epochs); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("recording validation") {
  CHECK_NOTHROW(validate_recording(recording(80.0)));
  CHECK(error_code_of([] { validate_recording(recording(80.0, {2, 3})); }) == ErrorCode::kInvalidInput);
  CHECK(error_code_of([] { validate_recording(recording(80.0, {0, 11})); }) == ErrorCode::kInvalidInput);
  auto rec = recording(80.0);
  rec.epochs[2].start_s = 45.0;
  CHECK(error_code_of([&] { validate_recording(rec); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("per-subject normalisation") {
  Rng rng(1);
  Dataset ds;
  for (int i = 0; i < 30; ++i) ds.rows.push_back(row("A", rng, 3.0, 10.0));
  for (int i = 0; i < 20; ++i) ds.rows.push_back(row("B", rng, 0.1, -5.0));
  for (auto& r : ds.rows) {
    if (r.subject_id == "B") r.features[7] = 2.0;
  }
  const auto report = normalize_per_subject(ds);
  CHECK(report.zero_variance_columns == 1);
  for (const std::string subject : {"A", "B"}) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      std::vector<double> col;
      for (const auto& r : ds.rows) {
        if (r.subject_id == subject) col.push_back(r.features[c]);
      }
      if (subject == "B" && c == 7) {
        for (double v : col) CHECK(v == 0.0);
        continue;
      }
      CHECK(std::abs(mean(col)) <= 1e-9);
      CHECK(std::abs(stddev(col, 0) - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("normalisation maps affine images to the same values and commutes with row order") {
  Rng rng(2);
  Dataset ds;
  for (int i = 0; i < 25; ++i) ds.rows.push_back(row("A", rng, 1.0, 0.0));
  for (int i = 0; i < 25; ++i) {
    LabeledWindow w = ds.rows[static_cast<std::size_t>(i)];
    w.subject_id = "B";
    for (double& v : w.features) v = 7.5 * v - 40.0;
    ds.rows.push_back(w);
  }
  Dataset shuffled = ds;
  Rng order(3);
  order.shuffle(shuffled.rows);

  normalize_per_subject(ds);
  for (std::size_t i = 0; i < 25; ++i) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) CHECK(std::abs(ds.rows[i].features[c] - ds.rows[i + 25].features[c]) <= 1e-9);
  }
  // Every shuffled row must reappear unchanged in the in-order result.
  normalize_per_subject(shuffled);
  for (std::size_t i = 0; i < shuffled.rows.size(); ++i) {
    bool found = false;
    for (const auto& r : ds.rows) {
      if (r.subject_id != shuffled.rows[i].subject_id) continue;
      bool same = true;
      for (std::size_t c = 0; c < kFeatureCount; ++c) same = same && std::abs(r.features[c] - shuffled.rows[i].features[c]) <= 1e-12;
      found = found || same;
    }
    CHECK(found);
  }
}

TEST_CASE("SMOTE balances classes and interpolates between neighbours") {
  Rng rng(4);
  Matrix x(0, 3);
  auto labels = labels_with_counts({90, 10});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double shift = labels[i] == 1 ? 4.0 : 0.0;
    const std::vector<double> r{shift + rng.normal(), rng.normal(), rng.normal()};
    x.append_row(r);
  }
  const auto out = smote(x, labels, 5, 11);
  CHECK(std::count(out.labels.begin(), out.labels.end(), 0) == 90);
  CHECK(std::count(out.labels.begin(), out.labels.end(), 1) == 90);
  CHECK(std::count(out.is_synthetic.begin(), out.is_synthetic.end(), true) == 80);
  REQUIRE(out.parents.size() == 80);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK_FALSE(out.is_synthetic[i]);
    for (std::size_t c = 0; c < 3; ++c) CHECK(out.features(i, c) == x(i, c));
  }
  for (std::size_t s = 0; s < 80; ++s) {
    const auto& p = out.parents[s];
    CHECK(labels[p.origin] == 1);
    CHECK(labels[p.neighbor] == 1);
    CHECK(p.origin != p.neighbor);
    CHECK(p.lambda >= 0.0);
    CHECK(p.lambda <= 1.0);
    CHECK(segment_distance(out.features.row(100 + s), x.row(p.origin), x.row(p.neighbor)) < 1e-9);
  }
}

TEST_CASE("SMOTE neighbours are among the k nearest") {
  Rng rng(5);
  Matrix x(0, 2);
  auto labels = labels_with_counts({40, 12});
  for (std::size_t i = 0; i < labels.size(); ++i) x.append_row(std::vector<double>{rng.normal(), rng.normal()});
  const auto out = smote(x, labels, 3, 6);
  for (const auto& p : out.parents) {
    std::vector<double> d;
    for (std::size_t j = 40; j < 52; ++j) {
      if (j != p.origin) d.push_back(std::hypot(x(j, 0) - x(p.origin, 0), x(j, 1) - x(p.origin, 1)));
    }
    std::sort(d.begin(), d.end());
    CHECK(std::hypot(x(p.neighbor, 0) - x(p.origin, 0), x(p.neighbor, 1) - x(p.origin, 1)) <= d[2] + 1e-12);
  }
}

TEST_CASE("SMOTE with two minority points stays on their segment") {
  Matrix x(0, 2);
  x.append_row(std::vector<double>{0.0, 0.0});
  x.append_row(std::vector<double>{1.0, 2.0});
  for (int i = 0; i < 6; ++i) x.append_row(std::vector<double>{5.0 + i, 5.0});
  const std::vector<int> labels{1, 1, 0, 0, 0, 0, 0, 0};
  const auto out = smote(x, labels, 1, 3);
  CHECK(out.effective_k == 1);
  for (std::size_t r = 8; r < out.features.rows(); ++r) {
    CHECK(std::abs(out.features(r, 1) - 2.0 * out.features(r, 0)) < 1e-9);
    CHECK(out.features(r, 0) >= 0.0);
    CHECK(out.features(r, 0) <= 1.0);
  }
}

TEST_CASE("SMOTE reduces k and refuses singleton classes") {
  Matrix x(0, 1);
  for (int i = 0; i < 10; ++i) x.append_row(std::vector<double>{static_cast<double>(i)});
  const auto labels = labels_with_counts({7, 3});
  CHECK(smote(x, labels, 5, 1).effective_k == 2);
  const auto bad = labels_with_counts({9, 1});
  CHECK(error_code_of([&] { smote(x, bad, 5, 1); }) == ErrorCode::kCannotOversample);
}

TEST_CASE("SMOTE is deterministic") {
  Rng rng(7);
  Matrix x(0, 2);
  auto labels = labels_with_counts({30, 8, 5});
  for (std::size_t i = 0; i < labels.size(); ++i) x.append_row(std::vector<double>{rng.normal(), rng.normal()});
  CHECK(smote(x, labels, 5, 42).features.data() == smote(x, labels, 5, 42).features.data());
}

TEST_CASE("stratified folds") {
  const auto even = labels_with_counts({50, 50});
  const auto folds = stratified_kfold(even, 5, 1);
  REQUIRE(folds.size() == 5);
  for (const auto& f : folds) {
    CHECK(f.size() == 20);
    CHECK(std::count_if(f.begin(), f.end(), [&](std::size_t i) { return even[i] == 0; }) == 10);
  }

  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng.index(6);
    std::vector<std::size_t> counts{k + rng.index(40), k + rng.index(40), k + rng.index(40)};
    const auto labels = labels_with_counts(counts);
    const auto fs = stratified_kfold(labels, k, static_cast<std::uint64_t>(trial));
    std::vector<int> seen(labels.size(), 0);
    for (const auto& f : fs) {
      for (std::size_t i : f) ++seen[i];
      for (std::size_t c = 0; c < counts.size(); ++c) {
        const double expected = static_cast<double>(counts[c]) / static_cast<double>(k);
        const auto got = std::count_if(f.begin(), f.end(), [&](std::size_t i) { return labels[i] == static_cast<int>(c); });
        CHECK(std::abs(static_cast<double>(got) - expected) <= 1.0);
      }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  }
  CHECK(error_code_of([] { stratified_kfold(labels_with_counts({10, 3}), 5, 1); }) == ErrorCode::kInvalidConfiguration);
}

TEST_CASE("97 samples over three classes") {
  const auto labels = labels_with_counts({50, 30, 17});
  for (const auto& f : stratified_kfold(labels, 5, 3)) {
    for (int c = 0; c < 3; ++c) {
      const double expected = std::count(labels.begin(), labels.end(), c) / 5.0;
      const auto got = std::count_if(f.begin(), f.end(), [&](std::size_t i) { return labels[i] == c; });
      CHECK(std::abs(static_cast<double>(got) - expected) <= 1.0);
    }
  }
}

TEST_CASE("group folds keep subjects together") {
  std::vector<int> labels;
  std::vector<std::string> groups;
  Rng rng(9);
  for (int s = 0; s < 12; ++s) {
    for (int i = 0; i < 10; ++i) {
      labels.push_back(static_cast<int>(rng.index(2)));
      groups.push_back("S" + std::to_string(s));
    }
  }
  const auto folds = stratified_group_kfold(labels, groups, 4, 1);
  std::map<std::string, std::set<std::size_t>> fold_of;
  std::size_t total = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    total += folds[f].size();
    for (std::size_t i : folds[f]) fold_of[groups[i]].insert(f);
  }
  CHECK(total == labels.size());
  for (const auto& [g, fs] : fold_of) CHECK(fs.size() == 1);
}

TEST_CASE("tuning split") {
  const auto labels = labels_with_counts({600, 250, 150});
  const auto split = tuning_split(labels, 0.16, 5);
  CHECK(split.tuning.size() == 160);
  CHECK(split.main.size() == 840);
  std::vector<int> seen(labels.size(), 0);
  for (std::size_t i : split.main) ++seen[i];
  for (std::size_t i : split.tuning) ++seen[i];
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  for (int c = 0; c < 3; ++c) {
    const double expected = 0.16 * static_cast<double>(std::count(labels.begin(), labels.end(), c));
    const auto got = std::count_if(split.tuning.begin(), split.tuning.end(), [&](std::size_t i) { return labels[i] == c; });
    CHECK(std::abs(static_cast<double>(got) - expected) <= 1.0);
  }
  const auto none = tuning_split(labels, 0.0, 5);
  CHECK(none.tuning.empty());
  CHECK(none.main.size() == labels.size());
  CHECK(error_code_of([] { tuning_split(labels_with_counts({50, 1}), 0.16, 1); }) == ErrorCode::kInvalidConfiguration);
}

TEST_CASE("dataset subset and columns") {
  Rng rng(10);
  Dataset ds;
  for (int i = 0; i < 5; ++i) ds.rows.push_back(row("A", rng, 1.0, static_cast<double>(i)));
  const std::vector<std::size_t> pick{4, 1};
  const auto sub = ds.subset(pick);
  REQUIRE(sub.size() == 2);
  CHECK(sub.rows[0].features == ds.rows[4].features);
  const auto m = ds.matrix();
  CHECK(m.rows() == 5);
  CHECK(m.cols() == 44);
  CHECK(ds.column("rr_mean_ms")[3] == m(3, 5));
}
