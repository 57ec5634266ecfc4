#include "painbvp/extraction.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <optional>

#include "painbvp/error.hpp"
#include "painbvp/parallel.hpp"

namespace painbvp {

SubjectExtraction extract_subject_features(const SubjectRecording& rec, const ExtractionConfig& config) {
  validate_recording(rec, config.epoch_spacing_s);
  SubjectExtraction out;
  out.subject_id = rec.subject_id;

  const auto filtered = butterworth_lowpass(rec.bvp, config.filter_cutoff_hz, config.filter_order);
  const auto beats = detect_beats(filtered, config.beats);
  out.beats_detected = beats.size();

  const auto windows = segment_windows(rec, config.window_s, config.overlap);
  out.windows_total = windows.size();
  const double rec_start = rec.bvp.start_time_s();
  const double rec_end = rec_start + rec.bvp.duration_s();
  const double context = std::max(config.window_s, config.hrv_context_s);

  std::vector<std::optional<LabeledWindow>> results(windows.size());
  parallel_for(windows.size(), [&](std::size_t w) {
    const auto& span = windows[w];
    LabeledWindow row;
    row.subject_id = rec.subject_id;
    row.window_start_s = span.start_s;
    row.pain_score = label_window(span.start_s, span.length_s, rec.epochs, config.epoch_spacing_s);
    row.pain_state = bin_pain(row.pain_score);

    const double centre = span.start_s + span.length_s / 2.0;
    const double ctx_start = std::clamp(centre - context / 2.0, rec_start, std::max(rec_start, rec_end - context));
    const auto lo = std::lower_bound(beats.begin(), beats.end(), ctx_start);
    const auto hi = std::lower_bound(beats.begin(), beats.end(), ctx_start + context);
    const auto ibi = extract_ibi(std::span<const double>(beats).subspan(static_cast<std::size_t>(lo - beats.begin()), static_cast<std::size_t>(hi - lo)), config.gate);
    const auto hrv = hrv_feature_vector(ibi, config.hrv).to_array();
    const auto bvp = bvp_feature_vector(filtered.slice(span.begin, span.length), config.bvp).values;

    for (std::size_t i = 0; i < kHrvFeatureCount; ++i) {
      if (!hrv[i] || !std::isfinite(*hrv[i])) return;
      row.features[i] = *hrv[i];
    }
    for (std::size_t i = 0; i < kBvpFeatureCount; ++i) {
      if (!bvp[i] || !std::isfinite(*bvp[i])) return;
      row.features[kHrvFeatureCount + i] = *bvp[i];
    }
    results[w] = std::move(row);
  });

  for (auto& r : results) {
    if (r) {
      out.rows.push_back(std::move(*r));
    } else {
      ++out.windows_dropped;
    }
  }
  if (out.windows_dropped > 0) {
    spdlog::info("subject {}: dropped {} of {} windows with undefined features", rec.subject_id,
                 out.windows_dropped, out.windows_total);
  }
  return out;
}

Dataset build_dataset(std::span<const SubjectRecording> recordings, const ExtractionConfig& config,
                      std::vector<SubjectExtraction>* summaries) {
  std::vector<SubjectExtraction> per_subject(recordings.size());
  parallel_for(recordings.size(), [&](std::size_t i) { per_subject[i] = extract_subject_features(recordings[i], config); });
  Dataset ds;
  for (auto& s : per_subject) {
    if (s.rows.empty()) spdlog::warn("subject {}: every window dropped, subject excluded", s.subject_id);
    ds.rows.insert(ds.rows.end(), s.rows.begin(), s.rows.end());
  }
  if (summaries != nullptr) {
    for (auto& s : per_subject) s.rows.clear();
    *summaries = std::move(per_subject);
  }
  return ds;
}

}  // namespace painbvp
