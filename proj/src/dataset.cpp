#include "painbvp/dataset.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "painbvp/error.hpp"
#include "painbvp/rng.hpp"

namespace painbvp {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const auto names = [] {
    std::array<std::string_view, kFeatureCount> out{};
    std::copy(kHrvFeatureNames.begin(), kHrvFeatureNames.end(), out.begin());
    std::copy(kBvpFeatureNames.begin(), kBvpFeatureNames.end(), out.begin() + kHrvFeatureCount);
    return out;
  }();
  return names;
}

std::size_t feature_index(std::string_view name) {
  const auto& names = feature_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorCode::kInvalidParameter, "unknown feature '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

std::string_view to_string(PainState state) {
  switch (state) {
    case PainState::kNP: return "NP";
    case PainState::kLP: return "LP";
    case PainState::kMP: return "MP";
    case PainState::kHP: return "HP";
  }
  return "?";
}

PainState pain_state_from_string(std::string_view text) {
  for (auto s : kPainStates) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::kInvalidInput, "unknown pain state '" + std::string(text) + "'");
}

PainState bin_pain(int score) {
  if (score < 0 || score > 10) {
    throw Error(ErrorCode::kInvalidInput, "pain score " + std::to_string(score) + " outside 0..10");
  }
  if (score == 0) return PainState::kNP;
  if (score <= 3) return PainState::kLP;
  if (score <= 6) return PainState::kMP;
  return PainState::kHP;
}

void validate_recording(const SubjectRecording& rec, double epoch_spacing_s) {
  const auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvalidInput, "subject '" + rec.subject_id + "': " + why);
  };
  if (rec.subject_id.empty()) fail("empty subject id");
  if (rec.epochs.empty()) fail("no epoch reports");
  if (rec.epochs.front().pain_score != 0) fail("first epoch score must be 0 (baseline)");
  for (std::size_t i = 0; i < rec.epochs.size(); ++i) {
    const auto& e = rec.epochs[i];
    if (e.pain_score < 0 || e.pain_score > 10) {
      fail("pain score " + std::to_string(e.pain_score) + " outside the 0-10 range at epoch " + std::to_string(i));
    }
    if (i > 0) {
      const double gap = e.start_s - rec.epochs[i - 1].start_s;
      if (std::abs(gap - epoch_spacing_s) > 1e-6) {
        fail("epoch starts must ascend at " + std::to_string(epoch_spacing_s) + " s spacing (epoch " +
             std::to_string(i) + ")");
      }
    }
  }
}

std::vector<WindowSpan> segment_windows(const SubjectRecording& rec, double len_s, double overlap) {
  if (!(len_s > 0.0)) throw Error(ErrorCode::kInvalidParameter, "window length must be positive");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw Error(ErrorCode::kInvalidParameter, "overlap must be in [0, 1)");
  const double fs = rec.bvp.sample_rate_hz();
  const auto win = static_cast<std::size_t>(std::llround(len_s * fs));
  const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(len_s * (1.0 - overlap) * fs)));
  std::vector<WindowSpan> out;
  const std::size_t n = rec.bvp.size();
  if (win == 0 || n < win) return out;
  for (std::size_t begin = 0; begin + win <= n; begin += stride) {
    out.push_back({begin, win, rec.bvp.time_at(begin), static_cast<double>(win) / fs});
  }
  return out;
}

int label_window(double window_start_s, double len_s, std::span<const EpochReport> epochs, double epoch_spacing_s) {
  if (epochs.empty()) throw Error(ErrorCode::kInvalidInput, "no epoch reports");
  const double centre = window_start_s + len_s / 2.0;
  if (centre < epochs.front().start_s || centre >= epochs.back().start_s + epoch_spacing_s) {
    throw Error(ErrorCode::kInvalidInput, "window centre " + std::to_string(centre) + " s lies outside every epoch");
  }
  auto it = std::upper_bound(epochs.begin(), epochs.end(), centre,
                             [](double c, const EpochReport& e) { return c < e.start_s; });
  return std::prev(it)->pain_score;
}

Dataset::Dataset() : column_names(feature_names().begin(), feature_names().end()) {}

Matrix Dataset::matrix() const {
  Matrix out(rows.size(), kFeatureCount);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(rows[r].features.begin(), rows[r].features.end(), out.row(r).begin());
  }
  return out;
}

std::vector<double> Dataset::column(std::string_view name) const {
  const std::size_t c = feature_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.features[c]);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.column_names = column_names;
  out.rows.reserve(indices.size());
  for (std::size_t i : indices) out.rows.push_back(rows.at(i));
  return out;
}

NormalizationReport normalize_per_subject(Dataset& ds) {
  NormalizationReport report;
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) by_subject[ds.rows[i].subject_id].push_back(i);
  for (const auto& [subject, idx] : by_subject) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      double m = 0.0;
      for (std::size_t i : idx) m += ds.rows[i].features[c];
      m /= static_cast<double>(idx.size());
      double ss = 0.0;
      for (std::size_t i : idx) ss += (ds.rows[i].features[c] - m) * (ds.rows[i].features[c] - m);
      const double sd = std::sqrt(ss / static_cast<double>(idx.size()));
      if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) {
        for (std::size_t i : idx) ds.rows[i].features[c] = 0.0;
        ++report.zero_variance_columns;
        continue;
      }
      for (std::size_t i : idx) ds.rows[i].features[c] = (ds.rows[i].features[c] - m) / sd;
    }
  }
  if (report.zero_variance_columns > 0) {
    spdlog::warn("per-subject normalisation: {} zero-variance subject/column pairs set to 0",
                 report.zero_variance_columns);
  }
  return report;
}

namespace {

std::map<int, std::vector<std::size_t>> indices_by_class(std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(i);
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

}  // namespace

SmoteResult smote(const Matrix& x, std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (x.rows() != labels.size()) throw Error(ErrorCode::kInvalidInput, "feature/label length mismatch");
  if (k < 1) throw Error(ErrorCode::kInvalidParameter, "SMOTE needs k >= 1");
  const auto classes = indices_by_class(labels);
  std::size_t majority = 0;
  for (const auto& [label, idx] : classes) majority = std::max(majority, idx.size());

  SmoteResult out;
  out.features = x;
  out.labels.assign(labels.begin(), labels.end());
  out.is_synthetic.assign(labels.size(), false);
  out.effective_k = k;

  Rng rng(seed);
  for (const auto& [label, members] : classes) {
    const std::size_t need = majority - members.size();
    if (need == 0) continue;
    if (members.size() < 2) {
      throw Error(ErrorCode::kCannotOversample,
                  "class " + std::to_string(label) + " has fewer than 2 members");
    }
    const std::size_t k_eff = std::min(k, members.size() - 1);
    if (k_eff < k) spdlog::warn("SMOTE: class {} has {} members, k reduced to {}", label, members.size(), k_eff);
    out.effective_k = std::min(out.effective_k, k_eff);

    std::vector<std::vector<std::size_t>> neighbours(members.size());
    for (std::size_t a = 0; a < members.size(); ++a) {
      std::vector<std::pair<double, std::size_t>> dist;
      dist.reserve(members.size() - 1);
      for (std::size_t b = 0; b < members.size(); ++b) {
        if (a != b) dist.emplace_back(squared_distance(x.row(members[a]), x.row(members[b])), members[b]);
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_eff), dist.end());
      for (std::size_t j = 0; j < k_eff; ++j) neighbours[a].push_back(dist[j].second);
    }

    std::vector<double> point(x.cols());
    for (std::size_t s = 0; s < need; ++s) {
      const std::size_t a = rng.index(members.size());
      const std::size_t nb = neighbours[a][rng.index(k_eff)];
      const double lambda = rng.uniform();
      const auto origin = x.row(members[a]);
      const auto other = x.row(nb);
      for (std::size_t c = 0; c < point.size(); ++c) point[c] = origin[c] + lambda * (other[c] - origin[c]);
      out.features.append_row(point);
      out.labels.push_back(label);
      out.is_synthetic.push_back(true);
      out.parents.push_back({members[a], nb, lambda});
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k,
                                                       std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidConfiguration, "k-fold needs k >= 2");
  auto classes = indices_by_class(labels);
  for (const auto& [label, idx] : classes) {
    if (idx.size() < k) {
      throw Error(ErrorCode::kInvalidConfiguration, "class " + std::to_string(label) + " has " +
                                                        std::to_string(idx.size()) + " samples, fewer than k=" +
                                                        std::to_string(k));
    }
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t cursor = 0;
  for (auto& [label, idx] : classes) {
    rng.shuffle(idx);
    for (std::size_t i : idx) folds[cursor++ % k].push_back(i);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<std::vector<std::size_t>> stratified_group_kfold(std::span<const int> labels,
                                                             std::span<const std::string> groups, std::size_t k,
                                                             std::uint64_t seed) {
  if (labels.size() != groups.size()) throw Error(ErrorCode::kInvalidInput, "label/group length mismatch");
  if (k < 2) throw Error(ErrorCode::kInvalidConfiguration, "k-fold needs k >= 2");
  std::map<std::string, std::vector<std::size_t>> by_group;
  for (std::size_t i = 0; i < groups.size(); ++i) by_group[groups[i]].push_back(i);
  if (by_group.size() < k) {
    throw Error(ErrorCode::kInvalidConfiguration, "fewer groups than folds");
  }
  const auto classes = indices_by_class(labels);
  std::map<int, std::size_t> class_slot;
  for (const auto& [label, idx] : classes) class_slot.emplace(label, class_slot.size());

  std::vector<std::pair<std::string, std::vector<std::size_t>>> order(by_group.begin(), by_group.end());
  Rng rng(seed);
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });

  std::vector<std::vector<std::size_t>> folds(k);
  std::vector<std::vector<double>> fold_class(k, std::vector<double>(class_slot.size(), 0.0));
  for (const auto& [group, idx] : order) {
    std::vector<double> counts(class_slot.size(), 0.0);
    for (std::size_t i : idx) counts[class_slot[labels[i]]] += 1.0;
    std::size_t best = 0;
    double best_cost = INFINITY;
    for (std::size_t f = 0; f < k; ++f) {
      double cost = 0.0;
      for (std::size_t c = 0; c < counts.size(); ++c) {
        const double v = fold_class[f][c] + counts[c];
        cost += v * v;
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = f;
      }
    }
    for (std::size_t c = 0; c < counts.size(); ++c) fold_class[best][c] += counts[c];
    folds[best].insert(folds[best].end(), idx.begin(), idx.end());
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  for (std::size_t c = 0; c < class_slot.size(); ++c) {
    for (std::size_t f = 0; f < k; ++f) {
      if (fold_class[f][c] == 0.0) {
        spdlog::warn("group k-fold: fold {} has no samples of class index {}", f, c);
      }
    }
  }
  return folds;
}

SplitIndices tuning_split(std::span<const int> labels, double frac, std::uint64_t seed) {
  if (!(frac >= 0.0 && frac < 1.0)) throw Error(ErrorCode::kInvalidConfiguration, "tuning fraction must be in [0, 1)");
  SplitIndices out;
  if (frac == 0.0) {
    out.main.resize(labels.size());
    std::iota(out.main.begin(), out.main.end(), std::size_t{0});
    return out;
  }
  auto classes = indices_by_class(labels);
  const auto total = static_cast<std::size_t>(std::llround(frac * static_cast<double>(labels.size())));

  std::vector<std::pair<int, double>> remainders;
  std::map<int, std::size_t> quota;
  std::size_t assigned = 0;
  for (const auto& [label, idx] : classes) {
    if (idx.size() < 2) {
      throw Error(ErrorCode::kInvalidConfiguration,
                  "class " + std::to_string(label) + " is too small to stratify the tuning split");
    }
    const double exact = frac * static_cast<double>(idx.size());
    quota[label] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[label];
    remainders.emplace_back(label, exact - std::floor(exact));
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i, ++assigned) ++quota[remainders[i].first];

  Rng rng(seed);
  for (auto& [label, idx] : classes) {
    if (quota[label] >= idx.size()) {
      throw Error(ErrorCode::kInvalidConfiguration,
                  "class " + std::to_string(label) + " is too small to stratify the tuning split");
    }
    rng.shuffle(idx);
    out.tuning.insert(out.tuning.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[label]));
    out.main.insert(out.main.end(), idx.begin() + static_cast<std::ptrdiff_t>(quota[label]), idx.end());
  }
  std::sort(out.main.begin(), out.main.end());
  std::sort(out.tuning.begin(), out.tuning.end());
  return out;
}

}  // namespace painbvp
