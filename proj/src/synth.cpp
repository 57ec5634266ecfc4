#include "painbvp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "painbvp/error.hpp"
#include "painbvp/rng.hpp"

namespace painbvp {

void validate(const SynthConfig& cfg) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kInvalidConfiguration, "synth: " + why); };
  if (!(cfg.sample_rate_hz > 0.0)) fail("sample rate must be positive");
  if (!(cfg.duration_s > 0.0)) fail("duration must be positive");
  if (!(cfg.epoch_s > 0.0)) fail("epoch length must be positive");
  if (cfg.epoch_scores.empty()) fail("no epoch scores");
  if (cfg.epoch_scores.front() != 0) fail("first epoch score must be 0");
  for (int s : cfg.epoch_scores) {
    if (s < 0 || s > 10) fail("epoch score " + std::to_string(s) + " outside 0..10");
  }
  if (static_cast<double>(cfg.epoch_scores.size()) * cfg.epoch_s < cfg.duration_s - 1e-9) {
    fail("epochs do not cover the recording duration");
  }
  for (double rr : cfg.mean_rr_ms) {
    if (!(rr >= 300.0 && rr <= 2000.0)) fail("mean RR must lie in [300, 2000] ms");
  }
  for (double a : cfg.amplitude) {
    if (!(a > 0.0)) fail("pulse amplitude must be positive");
  }
  if (!(cfg.noise_sd >= 0.0)) fail("noise sd must be >= 0");
  if (!(cfg.rr_jitter_sd_ms >= 0.0)) fail("RR jitter sd must be >= 0");
  if (!(cfg.lf_depth_ms >= 0.0) || !(cfg.hf_depth_ms >= 0.0)) fail("modulation depths must be >= 0");
  if (!(cfg.systolic_width_s > 0.0) || !(cfg.dicrotic_width_s > 0.0)) fail("pulse widths must be positive");
}

namespace {

PainState state_at(const SynthConfig& cfg, double t) {
  const auto epoch = std::min(cfg.epoch_scores.size() - 1, static_cast<std::size_t>(std::max(0.0, t / cfg.epoch_s)));
  return bin_pain(cfg.epoch_scores[epoch]);
}

}  // namespace

SynthRecording generate_recording(const SynthConfig& cfg, const std::string& subject_id) {
  validate(cfg);
  Rng rng(cfg.seed);
  const double fs = cfg.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration_s * fs));

  GroundTruth truth;
  truth.epoch_scores = cfg.epoch_scores;
  // Only beats whose systolic pulse lies wholly inside the recording are emitted.
  const double margin = 3.0 * cfg.systolic_width_s;
  double t = std::max(margin, 0.5 * cfg.mean_rr_ms[static_cast<std::size_t>(state_at(cfg, 0.0))] / 1000.0);
  while (t <= cfg.duration_s - margin) {
    truth.beat_times_s.push_back(t);
    const auto state = static_cast<std::size_t>(state_at(cfg, t));
    double rr = cfg.mean_rr_ms[state] + cfg.lf_depth_ms * std::sin(2.0 * std::numbers::pi * cfg.lf_hz * t) +
                cfg.hf_depth_ms * std::sin(2.0 * std::numbers::pi * cfg.hf_hz * t);
    if (cfg.rr_jitter_sd_ms > 0.0) rr += rng.normal(0.0, cfg.rr_jitter_sd_ms);
    t += std::clamp(rr, 300.0, 2000.0) / 1000.0;
  }

  std::vector<double> samples(n, 0.0);
  const double reach_before = 6.0 * cfg.systolic_width_s;
  const double reach_after = cfg.dicrotic_delay_s + 6.0 * cfg.dicrotic_width_s;
  for (double beat : truth.beat_times_s) {
    const double amp = cfg.amplitude[static_cast<std::size_t>(state_at(cfg, beat))];
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil((beat - reach_before) * fs)));
    const auto last = std::min(n, static_cast<std::size_t>(std::max(0.0, std::floor((beat + reach_after) * fs))) + 1);
    for (std::size_t i = first; i < last; ++i) {
      const double dt = static_cast<double>(i) / fs - beat;
      const double sys = std::exp(-dt * dt / (2.0 * cfg.systolic_width_s * cfg.systolic_width_s));
      const double dd = dt - cfg.dicrotic_delay_s;
      const double dic = std::exp(-dd * dd / (2.0 * cfg.dicrotic_width_s * cfg.dicrotic_width_s));
      samples[i] += amp * (sys + cfg.dicrotic_ratio * dic);
    }
  }
  if (cfg.noise_sd > 0.0) {
    for (double& v : samples) v += rng.normal(0.0, cfg.noise_sd);
  }

  truth.sample_states.resize(n);
  for (std::size_t i = 0; i < n; ++i) truth.sample_states[i] = state_at(cfg, static_cast<double>(i) / fs);

  SubjectRecording rec{subject_id, SampledSignal(fs, std::move(samples)), {}};
  for (std::size_t e = 0; e < cfg.epoch_scores.size(); ++e) {
    rec.epochs.push_back({static_cast<double>(e) * cfg.epoch_s, cfg.epoch_scores[e]});
  }
  return {std::move(rec), std::move(truth)};
}

std::vector<SubjectRecording> generate_cohort(std::size_t n_subjects, const SynthConfig& base, std::uint64_t seed) {
  if (n_subjects < 1) throw Error(ErrorCode::kInvalidConfiguration, "cohort needs at least one subject");
  const std::size_t width = std::max<std::size_t>(2, std::to_string(n_subjects).size());
  std::vector<SubjectRecording> out;
  out.reserve(n_subjects);
  for (std::size_t i = 0; i < n_subjects; ++i) {
    SynthConfig cfg = base;
    cfg.seed = derive_seed(seed, i);
    Rng perturb(derive_seed(seed, 1'000'000 + i));
    const double rr_scale = perturb.uniform(0.9, 1.1);
    const double amp_scale = perturb.uniform(0.8, 1.2);
    for (double& rr : cfg.mean_rr_ms) rr = std::clamp(rr * rr_scale, 300.0, 2000.0);
    for (double& a : cfg.amplitude) a *= amp_scale;
    std::string id = std::to_string(i + 1);
    id = "S" + std::string(width - id.size(), '0') + id;
    out.push_back(std::move(generate_recording(cfg, id).recording));
  }
  return out;
}

}  // namespace painbvp
