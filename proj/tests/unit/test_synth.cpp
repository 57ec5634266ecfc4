#include <doctest.h>

#include <cmath>
#include <set>

#include "painbvp/beat_ibi.hpp"
#include "painbvp/synth.hpp"
#include "support.hpp"

using namespace painbvp;
using testing::error_code_of;

namespace {

SynthConfig metronome() {
  SynthConfig cfg;
  cfg.mean_rr_ms = {1000.0, 1000.0, 1000.0, 1000.0};
  cfg.lf_depth_ms = cfg.hf_depth_ms = cfg.rr_jitter_sd_ms = cfg.noise_sd = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("60 bpm without jitter gives one beat per second") {
  const auto rec = generate_recording(metronome());
  const auto& beats = rec.truth.beat_times_s;
  CHECK(beats.size() >= 219);
  CHECK(beats.size() <= 221);
  for (std::size_t i = 1; i < beats.size(); ++i) CHECK(std::abs(beats[i] - beats[i - 1] - 1.0) < 1e-9);
  CHECK(rec.recording.bvp.size() == 220 * 2048);
  CHECK(rec.recording.epochs.size() == 11);
}

TEST_CASE("zero-noise recording closes the loop with the beat detector") {
  auto cfg = metronome();
  cfg.noise_sd = 0.0;
  cfg.rr_jitter_sd_ms = 10.0;
  cfg.lf_depth_ms = 25.0;
  const auto rec = generate_recording(cfg);
  const auto beats = detect_beats(butterworth_lowpass(rec.recording.bvp, 8.0, 2));
  REQUIRE(beats.size() == rec.truth.beat_times_s.size());
  for (std::size_t i = 0; i < beats.size(); ++i) CHECK(std::abs(beats[i] - rec.truth.beat_times_s[i]) <= 0.005);
}

TEST_CASE("generation is deterministic per seed") {
  SynthConfig cfg;
  cfg.duration_s = 40.0;
  cfg.epoch_scores = {0, 5};
  const auto a = generate_recording(cfg);
  const auto b = generate_recording(cfg);
  CHECK(a.recording.bvp.samples() == b.recording.bvp.samples());
  CHECK(a.truth.beat_times_s == b.truth.beat_times_s);
  cfg.seed = 2;
  CHECK(generate_recording(cfg).recording.bvp.samples() != a.recording.bvp.samples());
}

TEST_CASE("ground truth is consistent with the configuration") {
  SynthConfig cfg;
  const auto rec = generate_recording(cfg);
  CHECK(rec.truth.epoch_scores == cfg.epoch_scores);
  REQUIRE(rec.truth.sample_states.size() == rec.recording.bvp.size());
  CHECK(rec.truth.sample_states.front() == PainState::kNP);
  CHECK(rec.truth.sample_states[static_cast<std::size_t>(25.0 * 2048)] == bin_pain(cfg.epoch_scores[1]));
  CHECK(rec.truth.sample_states.back() == bin_pain(cfg.epoch_scores.back()));
  CHECK_NOTHROW(validate_recording(rec.recording));
  for (std::size_t s = 1; s < 4; ++s) CHECK(cfg.mean_rr_ms[s] < cfg.mean_rr_ms[s - 1]);
}

TEST_CASE("invalid configurations") {
  auto bad = [](auto mutate) {
    SynthConfig cfg;
    mutate(cfg);
    return error_code_of([&] { validate(cfg); });
  };
  CHECK(bad([](SynthConfig& c) { c.mean_rr_ms[2] = 250.0; }) == ErrorCode::kInvalidConfiguration);
  CHECK(bad([](SynthConfig& c) { c.noise_sd = -0.1; }) == ErrorCode::kInvalidConfiguration);
  CHECK(bad([](SynthConfig& c) { c.epoch_scores[0] = 3; }) == ErrorCode::kInvalidConfiguration);
  CHECK(bad([](SynthConfig& c) { c.epoch_scores[4] = 12; }) == ErrorCode::kInvalidConfiguration);
  CHECK(bad([](SynthConfig& c) { c.epoch_scores.resize(5); }) == ErrorCode::kInvalidConfiguration);
  CHECK(bad([](SynthConfig& c) { c.sample_rate_hz = 0.0; }) == ErrorCode::kInvalidConfiguration);
}

TEST_CASE("cohort") {
  SynthConfig base;
  base.duration_s = 40.0;
  base.epoch_scores = {0, 6};
  const auto cohort = generate_cohort(32, base, 7);
  REQUIRE(cohort.size() == 32);
  std::set<std::string> ids;
  for (const auto& rec : cohort) {
    ids.insert(rec.subject_id);
    CHECK_NOTHROW(validate_recording(rec));
  }
  CHECK(ids.size() == 32);
  CHECK(cohort[0].subject_id == "S01");
  CHECK(cohort[31].subject_id == "S32");
  CHECK(cohort[0].bvp.samples() != cohort[1].bvp.samples());
  CHECK(generate_cohort(3, base, 7)[2].bvp.samples() == cohort[2].bvp.samples());
  CHECK(error_code_of([&] { generate_cohort(0, base, 7); }) == ErrorCode::kInvalidConfiguration);
}
