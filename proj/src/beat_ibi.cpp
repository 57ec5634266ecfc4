#include "painbvp/beat_ibi.hpp"

#include <algorithm>
#include <cmath>

#include "painbvp/error.hpp"

namespace painbvp {

std::vector<double> detect_beats(const SampledSignal& bvp, const BeatDetectorOptions& options) {
  const auto& x = bvp.samples();
  const std::size_t n = x.size();
  const double fs = bvp.sample_rate_hz();
  if (n < 3) return {};

  const double global_mean = mean(x);
  const double global_sd = stddev(x, 0);
  if (!(global_sd > 0.0)) return {};

  // Prefix sums of the centred signal keep cancellation small over long recordings.
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = x[i] - global_mean;
    s1[i + 1] = s1[i] + c;
    s2[i + 1] = s2[i] + c * c;
  }
  const auto half = static_cast<std::size_t>(std::lround(options.window_s * fs / 2.0));
  const double sd_floor = options.min_std_fraction * global_sd;

  struct Candidate {
    std::size_t index;
    double value;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(x[i] > x[i - 1] && x[i] >= x[i + 1])) continue;
    const std::size_t lo = i > half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    const double count = static_cast<double>(hi - lo);
    const double m = (s1[hi] - s1[lo]) / count;
    const double var = std::max(0.0, (s2[hi] - s2[lo]) / count - m * m);
    const double sd = std::max(std::sqrt(var), sd_floor);
    if (x[i] - global_mean > m + options.std_factor * sd) candidates.push_back({i, x[i]});
  }

  // Refractory period: within any run of candidates closer than the
  // refractory spacing only the tallest survives.
  const auto refractory = static_cast<std::size_t>(std::lround(options.refractory_s * fs));
  std::vector<Candidate> kept;
  for (const auto& c : candidates) {
    if (!kept.empty() && c.index - kept.back().index < refractory) {
      if (c.value > kept.back().value) kept.back() = c;
      continue;
    }
    kept.push_back(c);
  }
  // Replacing a peak may bring it within the refractory spacing of its predecessor.
  std::vector<Candidate> pruned;
  for (const auto& c : kept) {
    if (!pruned.empty() && c.index - pruned.back().index < refractory) {
      if (c.value > pruned.back().value) pruned.back() = c;
      continue;
    }
    pruned.push_back(c);
  }

  std::vector<double> times;
  times.reserve(pruned.size());
  for (const auto& c : pruned) times.push_back(bvp.time_at(c.index));
  return times;
}

IbiSeries extract_ibi(std::span<const double> beat_times_s, const IbiGate& gate) {
  IbiSeries out;
  out.beat_times_s.assign(beat_times_s.begin(), beat_times_s.end());
  for (std::size_t i = 1; i < beat_times_s.size(); ++i) {
    if (!(beat_times_s[i] > beat_times_s[i - 1])) {
      throw Error(ErrorCode::kInvalidInput, "beat times must be strictly ascending");
    }
  }
  for (std::size_t i = 1; i < beat_times_s.size(); ++i) {
    const double ms = (beat_times_s[i] - beat_times_s[i - 1]) * 1000.0;
    if (gate.enabled && (ms < gate.min_ms || ms > gate.max_ms)) continue;
    out.intervals_ms.push_back(ms);
    out.interval_end_s.push_back(beat_times_s[i]);
  }
  return out;
}

IbiSeries ibi_from_intervals(std::span<const double> intervals_ms, double t0_s) {
  IbiSeries out;
  double t = t0_s;
  out.beat_times_s.push_back(t);
  for (double ms : intervals_ms) {
    t += ms / 1000.0;
    out.beat_times_s.push_back(t);
    out.intervals_ms.push_back(ms);
    out.interval_end_s.push_back(t);
  }
  if (intervals_ms.empty()) out.beat_times_s.clear();
  return out;
}

}  // namespace painbvp
