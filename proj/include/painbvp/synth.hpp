#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "painbvp/dataset.hpp"

namespace painbvp {

/// Cold-pressor-like recording generator. Per-state arrays are indexed by
/// PainState (NP, LP, MP, HP).
struct SynthConfig {
  std::uint64_t seed = 1;
  double duration_s = 220.0;
  double sample_rate_hz = 2048.0;
  double epoch_s = 20.0;
  std::vector<int> epoch_scores = {0, 2, 2, 3, 5, 5, 6, 8, 8, 9, 9};
  std::array<double, 4> mean_rr_ms = {850.0, 780.0, 715.0, 655.0};
  std::array<double, 4> amplitude = {1.0, 0.88, 0.77, 0.67};
  double lf_depth_ms = 25.0;
  double lf_hz = 0.1;
  double hf_depth_ms = 20.0;
  double hf_hz = 0.25;
  double rr_jitter_sd_ms = 10.0;
  double noise_sd = 0.02;
  // Pulse template: systolic Gaussian at the beat time plus a delayed
  // dicrotic Gaussian scaled by dicrotic_ratio.
  double systolic_width_s = 0.06;
  double dicrotic_delay_s = 0.3;
  double dicrotic_width_s = 0.08;
  double dicrotic_ratio = 0.3;
};

/// Throws kInvalidConfiguration on any out-of-bounds physiology or protocol value.
void validate(const SynthConfig& cfg);

struct GroundTruth {
  std::vector<double> beat_times_s;
  std::vector<int> epoch_scores;
  std::vector<PainState> sample_states;
};

struct SynthRecording {
  SubjectRecording recording;
  GroundTruth truth;
};

SynthRecording generate_recording(const SynthConfig& cfg, const std::string& subject_id = "S01");

/// Subject i gets seed derive_seed(seed, i), mean RR scaled by U[0.9, 1.1]
/// and amplitude by U[0.8, 1.2]; ids are S01, S02, ...
std::vector<SubjectRecording> generate_cohort(std::size_t n_subjects, const SynthConfig& base, std::uint64_t seed);

}  // namespace painbvp
