#pragma once

#include <span>
#include <string>
#include <vector>

#include "painbvp/beat_ibi.hpp"
#include "painbvp/bvp_features.hpp"
#include "painbvp/dataset.hpp"
#include "painbvp/hrv_features.hpp"

namespace painbvp {

struct ExtractionConfig {
  double filter_cutoff_hz = 8.0;
  int filter_order = 2;
  double window_s = 5.0;
  double overlap = 0.5;
  // IBI features use the beats inside a context of this length centred on
  // the window (shifted to stay inside the recording). Set equal to
  // window_s for strictly per-window HRV.
  double hrv_context_s = 30.0;
  double epoch_spacing_s = 20.0;
  BeatDetectorOptions beats;
  IbiGate gate;
  HrvOptions hrv;
  BvpOptions bvp;
};

struct SubjectExtraction {
  std::string subject_id;
  std::vector<LabeledWindow> rows;
  std::size_t windows_total = 0;
  std::size_t windows_dropped = 0;  // any undefined feature
  std::size_t beats_detected = 0;
};

/// Filters, detects beats, segments and computes the 44-feature vector of
/// every window. Windows with an undefined feature are dropped and counted.
SubjectExtraction extract_subject_features(const SubjectRecording& rec, const ExtractionConfig& config = {});

/// Per-subject extraction concatenated in input order. Subjects whose every
/// window is dropped contribute no rows.
Dataset build_dataset(std::span<const SubjectRecording> recordings, const ExtractionConfig& config = {},
                      std::vector<SubjectExtraction>* summaries = nullptr);

}  // namespace painbvp
