#include <doctest.h>

#include <cmath>

#include "painbvp/beat_ibi.hpp"
#include "painbvp/synth.hpp"
#include "support.hpp"

using namespace painbvp;

namespace {

SynthConfig quiet_config(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.duration_s = 60.0;
  cfg.epoch_scores = {0, 0, 0};
  cfg.noise_sd = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("zero-noise synthetic beats are recovered within 5 ms") {
  auto cfg = quiet_config(3);
  cfg.mean_rr_ms = {1000.0, 1000.0, 1000.0, 1000.0};
  cfg.lf_depth_ms = cfg.hf_depth_ms = cfg.rr_jitter_sd_ms = 0.0;
  const auto rec = generate_recording(cfg);
  const auto filtered = butterworth_lowpass(rec.recording.bvp, 8.0, 2);
  const auto beats = detect_beats(filtered);
  const auto& truth = rec.truth.beat_times_s;
  REQUIRE(beats.size() == truth.size());
  for (std::size_t i = 0; i < beats.size(); ++i) CHECK(std::abs(beats[i] - truth[i]) <= 0.005);
}

TEST_CASE("flat signal and single pulse") {
  CHECK(detect_beats(SampledSignal(100.0, std::vector<double>(500, 1.0))).empty());
  std::vector<double> x(3 * 256, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = (static_cast<double>(i) - 384.0) / 256.0;
    x[i] = std::exp(-t * t / (2 * 0.05 * 0.05));
  }
  const auto beats = detect_beats(SampledSignal(256.0, x));
  REQUIRE(beats.size() == 1);
  CHECK(beats[0] == doctest::Approx(1.5));
}

TEST_CASE("detection is translation equivariant and scale invariant") {
  auto cfg = quiet_config(8);
  cfg.noise_sd = 0.02;
  const auto rec = generate_recording(cfg);
  const auto filtered = butterworth_lowpass(rec.recording.bvp, 8.0, 2);
  const auto base = detect_beats(filtered);

  const SampledSignal shifted(filtered.sample_rate_hz(), filtered.samples(), 12.5);
  const auto moved = detect_beats(shifted);
  REQUIRE(moved.size() == base.size());
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(moved[i] == doctest::Approx(base[i] + 12.5));

  auto scaled_samples = filtered.samples();
  for (double& v : scaled_samples) v *= 7.25;
  const auto scaled = detect_beats(SampledSignal(filtered.sample_rate_hz(), scaled_samples));
  CHECK(scaled == base);
}

TEST_CASE("extract_ibi") {
  const auto a = extract_ibi(std::vector<double>{0.0, 0.8, 1.6});
  REQUIRE(a.intervals_ms.size() == 2);
  CHECK(a.intervals_ms[0] == doctest::Approx(800.0));
  CHECK(a.intervals_ms[1] == doctest::Approx(800.0));
  CHECK(extract_ibi(std::vector<double>{0.0}).empty());
  CHECK(extract_ibi(std::vector<double>{}).empty());

  const auto gated = extract_ibi(std::vector<double>{0.0, 0.8, 3.9});
  REQUIRE(gated.intervals_ms.size() == 1);
  CHECK(gated.intervals_ms[0] == doctest::Approx(800.0));
  CHECK(gated.interval_end_s[0] == doctest::Approx(0.8));

  const auto open = extract_ibi(std::vector<double>{0.0, 0.8, 3.9}, IbiGate{false, 300.0, 2000.0});
  CHECK(open.intervals_ms.size() == 2);

  CHECK(testing::error_code_of([] { extract_ibi(std::vector<double>{0.0, 1.0, 1.0}); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("retained intervals respect the gate") {
  Rng rng(4);
  std::vector<double> beats{0.0};
  for (int i = 0; i < 300; ++i) beats.push_back(beats.back() + rng.uniform(0.1, 2.5));
  for (double ms : extract_ibi(beats).intervals_ms) {
    CHECK(ms >= 300.0);
    CHECK(ms <= 2000.0);
  }
}
