#pragma once

#include <array>
#include <span>
#include <vector>

namespace painbvp {

/// Uniformly sampled real waveform. Construction validates the sample rate
/// and rejects non-finite samples.
class SampledSignal {
 public:
  SampledSignal(double sample_rate_hz, std::vector<double> samples, double start_time_s = 0.0);

  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  double start_time_s() const noexcept { return start_time_s_; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_s() const noexcept { return static_cast<double>(samples_.size()) / sample_rate_hz_; }
  double time_at(std::size_t index) const noexcept {
    return start_time_s_ + static_cast<double>(index) / sample_rate_hz_;
  }

  /// Samples [begin, begin + count) as a new signal with shifted start time.
  SampledSignal slice(std::size_t begin, std::size_t count) const;

 private:
  double sample_rate_hz_;
  std::vector<double> samples_;
  double start_time_s_;
};

struct PowerSpectrum {
  std::vector<double> freqs_hz;
  std::vector<double> power;  // density, units²/Hz

  double resolution_hz() const noexcept {
    return freqs_hz.size() > 1 ? freqs_hz[1] - freqs_hz[0] : 0.0;
  }
};

enum class SpectrumWindow { kRectangular, kHann };
enum class SpectrumEstimator { kPeriodogram, kWelch };

struct SpectrumOptions {
  SpectrumEstimator estimator = SpectrumEstimator::kPeriodogram;
  SpectrumWindow window = SpectrumWindow::kRectangular;
  int welch_segments = 4;  // 50% overlap
};

/// Zero-phase Butterworth low-pass: cascaded second-order sections run
/// forward then backward with odd-reflection edge padding.
SampledSignal butterworth_lowpass(const SampledSignal& signal, double cutoff_hz, int order = 2);

/// Second-order sections {b0, b1, b2, a1, a2} (a0 = 1) of a digital
/// Butterworth low-pass, each normalised to unit DC gain.
std::vector<std::array<double, 5>> butterworth_sections(double cutoff_hz, double sample_rate_hz, int order);

/// Population z-score. Throws kDegenerateInput on zero variance.
std::vector<double> zscore(std::span<const double> x);

/// Normalised sample autocorrelation r[0..max_lag], r[0] = 1.
std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag);

/// One-sided power spectral density. With the default rectangular
/// periodogram, sum(power) * df equals the mean square of the input.
PowerSpectrum power_spectrum(const SampledSignal& signal, const SpectrumOptions& options = {});

/// Power in [lo_hz, hi_hz): sum of density times bin width over included bins.
double band_power(const PowerSpectrum& spec, double lo_hz, double hi_hz);
double total_power(const PowerSpectrum& spec);

// Small numeric helpers shared by the feature extractors.
double mean(std::span<const double> x);
double variance(std::span<const double> x, int ddof = 0);
double stddev(std::span<const double> x, int ddof = 0);
double median(std::span<const double> x);

}  // namespace painbvp
