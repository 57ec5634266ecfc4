#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "painbvp/bvp_features.hpp"
#include "painbvp/hrv_features.hpp"
#include "painbvp/matrix.hpp"
#include "painbvp/signal.hpp"

namespace painbvp {

inline constexpr std::size_t kFeatureCount = kHrvFeatureCount + kBvpFeatureCount;

/// 20 IBI-derived names followed by 24 BVP-derived names.
const std::array<std::string_view, kFeatureCount>& feature_names();
std::size_t feature_index(std::string_view name);

enum class PainState { kNP = 0, kLP = 1, kMP = 2, kHP = 3 };

inline constexpr std::array<PainState, 4> kPainStates = {PainState::kNP, PainState::kLP, PainState::kMP,
                                                         PainState::kHP};

std::string_view to_string(PainState state);
PainState pain_state_from_string(std::string_view text);

/// NP: 0, LP: (0, 3], MP: (3, 6], HP: (6, 10]. Throws kInvalidInput outside 0..10.
PainState bin_pain(int score);

struct EpochReport {
  double start_s;
  int pain_score;
};

struct SubjectRecording {
  std::string subject_id;
  SampledSignal bvp;
  std::vector<EpochReport> epochs;
};

/// Throws kInvalidInput describing the first violated invariant: epochs
/// ascending at `epoch_spacing_s`, first score 0, scores within 0..10.
void validate_recording(const SubjectRecording& rec, double epoch_spacing_s = 20.0);

struct WindowSpan {
  std::size_t begin;   // first sample
  std::size_t length;  // samples
  double start_s;
  double length_s;
};

/// Fully contained windows starting at 0, stride len_s * (1 - overlap).
std::vector<WindowSpan> segment_windows(const SubjectRecording& rec, double len_s = 5.0, double overlap = 0.5);

/// Score of the epoch containing the window centre; a centre on an epoch
/// boundary takes the later epoch.
int label_window(double window_start_s, double len_s, std::span<const EpochReport> epochs,
                 double epoch_spacing_s = 20.0);

struct LabeledWindow {
  std::string subject_id;
  double window_start_s = 0.0;
  std::array<double, kFeatureCount> features{};
  int pain_score = 0;
  PainState pain_state = PainState::kNP;
  bool is_synthetic = false;
};

struct Dataset {
  std::vector<std::string> column_names;
  std::vector<LabeledWindow> rows;

  Dataset();
  std::size_t size() const noexcept { return rows.size(); }
  Matrix matrix() const;
  std::vector<double> column(std::string_view name) const;
  Dataset subset(std::span<const std::size_t> indices) const;
};

struct NormalizationReport {
  std::size_t zero_variance_columns = 0;  // (subject, column) pairs set to zero
};

/// Population z-score of every feature column within each subject.
NormalizationReport normalize_per_subject(Dataset& ds);

struct SmoteResult {
  Matrix features;
  std::vector<int> labels;
  std::vector<bool> is_synthetic;
  struct Parent {
    std::size_t origin;    // row index into the input
    std::size_t neighbor;  // row index into the input
    double lambda;
  };
  std::vector<Parent> parents;  // one per synthetic row, in output order
  std::size_t effective_k = 0;
};

/// Oversamples every class up to the majority count by interpolating
/// between a minority row and one of its k nearest same-class neighbours.
/// Original rows come first, in input order.
SmoteResult smote(const Matrix& x, std::span<const int> labels, std::size_t k, std::uint64_t seed);

/// k disjoint test folds whose per-class counts differ from exact
/// proportion by at most one. Throws kInvalidConfiguration if any class has
/// fewer than k members.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

/// Keeps all rows of a group in one fold; groups are dealt to folds
/// largest-first, balancing per-class counts.
std::vector<std::vector<std::size_t>> stratified_group_kfold(std::span<const int> labels,
                                                             std::span<const std::string> groups, std::size_t k,
                                                             std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> main;
  std::vector<std::size_t> tuning;
};

/// Class-stratified holdout of round(frac * n) rows, allocated to classes
/// by largest remainder.
SplitIndices tuning_split(std::span<const int> labels, double frac, std::uint64_t seed);

}  // namespace painbvp
