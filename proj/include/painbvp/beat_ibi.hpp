#pragma once

#include <span>
#include <vector>

#include "painbvp/signal.hpp"

namespace painbvp {

struct BeatDetectorOptions {
  double window_s = 2.0;         // rolling statistics window, centred
  double std_factor = 0.5;       // threshold = rolling mean + std_factor * rolling std
  double refractory_s = 0.25;    // minimum spacing between beats (240 bpm)
  // Rolling std is floored at this fraction of the whole-signal std so that
  // rounding-level ripple on a flat baseline never crosses the threshold.
  double min_std_fraction = 0.01;
};

/// Systolic peak times (seconds, sample resolution) of a low-pass filtered BVP.
std::vector<double> detect_beats(const SampledSignal& bvp, const BeatDetectorOptions& options = {});

struct IbiGate {
  bool enabled = true;
  double min_ms = 300.0;
  double max_ms = 2000.0;
};

/// Inter-beat intervals. `beat_times_s` holds every detected beat; the
/// cleaning gate removes out-of-range intervals without merging neighbours,
/// so `interval_end_s[i]` records the beat that closes `intervals_ms[i]`.
struct IbiSeries {
  std::vector<double> beat_times_s;
  std::vector<double> intervals_ms;
  std::vector<double> interval_end_s;

  std::size_t size() const noexcept { return intervals_ms.size(); }
  bool empty() const noexcept { return intervals_ms.empty(); }
};

IbiSeries extract_ibi(std::span<const double> beat_times_s, const IbiGate& gate = {});

/// Builds a series directly from intervals, closing beat times accumulated from t0.
IbiSeries ibi_from_intervals(std::span<const double> intervals_ms, double t0_s = 0.0);

}  // namespace painbvp
