#include "painbvp/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "fft.hpp"
#include "painbvp/error.hpp"

namespace painbvp {

using Section = std::array<double, 5>;

SampledSignal::SampledSignal(double sample_rate_hz, std::vector<double> samples, double start_time_s)
    : sample_rate_hz_(sample_rate_hz), samples_(std::move(samples)), start_time_s_(start_time_s) {
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
    throw Error(ErrorCode::kInvalidParameter, "sample rate must be positive and finite");
  }
  if (!std::isfinite(start_time_s_)) throw Error(ErrorCode::kInvalidParameter, "start time must be finite");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw Error(ErrorCode::kInvalidInput, "non-finite sample at index " + std::to_string(i));
    }
  }
}

SampledSignal SampledSignal::slice(std::size_t begin, std::size_t count) const {
  if (begin > samples_.size() || count > samples_.size() - begin) {
    throw Error(ErrorCode::kInvalidParameter, "slice out of range");
  }
  std::vector<double> part(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                           samples_.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return SampledSignal(sample_rate_hz_, std::move(part), time_at(begin));
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x, int ddof) {
  const auto n = static_cast<double>(x.size());
  if (n - ddof <= 0) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / (n - ddof);
}

double stddev(std::span<const double> x, int ddof) { return std::sqrt(variance(x, ddof)); }

double median(std::span<const double> x) {
  if (x.empty()) return 0.0;
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

std::vector<Section> butterworth_sections(double cutoff_hz, double sample_rate_hz, int order) {
  if (order < 1 || order > 8) throw Error(ErrorCode::kInvalidParameter, "filter order must be in 1..8");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0)) {
    throw Error(ErrorCode::kInvalidParameter, "cutoff must lie in (0, Nyquist)");
  }
  const double fs2 = 2.0 * sample_rate_hz;
  const double warped = fs2 * std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);

  std::vector<Section> sections;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi / 2.0 + std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    const std::complex<double> s = warped * std::polar(1.0, theta);
    const std::complex<double> z = (fs2 + s) / (fs2 - s);
    const double a1 = -2.0 * z.real();
    const double a2 = std::norm(z);
    const double g = (1.0 + a1 + a2) / 4.0;
    sections.push_back({g, 2.0 * g, g, a1, a2});
  }
  if (order % 2 == 1) {
    const double z = (fs2 - warped) / (fs2 + warped);
    const double g = (1.0 - z) / 2.0;
    sections.push_back({g, g, 0.0, -z, 0.0});
  }
  return sections;
}

namespace {

// Direct-form II transposed cascade, state initialised to the steady state
// of a constant input equal to x[0].
void sosfilt_steady(const std::vector<Section>& sections, std::vector<double>& x) {
  if (x.empty()) return;
  const double x0 = x.front();
  for (const auto& [b0, b1, b2, a1, a2] : sections) {
    double z2 = (b2 - a2) * x0;
    double z1 = (b1 - a1) * x0 + z2;
    for (double& v : x) {
      const double y = b0 * v + z1;
      z1 = b1 * v - a1 * y + z2;
      z2 = b2 * v - a2 * y;
      v = y;
    }
  }
}

}  // namespace

SampledSignal butterworth_lowpass(const SampledSignal& signal, double cutoff_hz, int order) {
  const auto sections = butterworth_sections(cutoff_hz, signal.sample_rate_hz(), order);
  const auto& x = signal.samples();
  const std::size_t n = x.size();
  if (n <= static_cast<std::size_t>(3 * order) || n < 2) {
    throw Error(ErrorCode::kInsufficientData, "signal too short for edge padding");
  }
  const std::size_t pad = std::min<std::size_t>(6 * static_cast<std::size_t>(order), n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  sosfilt_steady(sections, ext);
  std::reverse(ext.begin(), ext.end());
  sosfilt_steady(sections, ext);
  std::reverse(ext.begin(), ext.end());

  std::vector<double> out(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                          ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
  return SampledSignal(signal.sample_rate_hz(), std::move(out), signal.start_time_s());
}

std::vector<double> zscore(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorCode::kInsufficientData, "z-score needs at least 2 samples");
  const double m = mean(x);
  const double sd = stddev(x, 0);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi || !(sd > 0.0)) throw Error(ErrorCode::kDegenerateInput, "zero variance");
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [&](double v) { return (v - m) / sd; });
  return out;
}

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (max_lag < 1 || n <= max_lag) {
    throw Error(ErrorCode::kInvalidParameter, "autocorrelation needs len(x) > max_lag >= 1");
  }
  const double m = mean(x);
  std::vector<double> centered(n);
  std::transform(x.begin(), x.end(), centered.begin(), [&](double v) { return v - m; });
  double denom = 0.0;
  for (double v : centered) denom += v * v;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi || !(denom > 0.0)) throw Error(ErrorCode::kDegenerateInput, "constant input");

  std::vector<double> r(max_lag + 1);
  if (n * (max_lag + 1) <= 65536) {
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
      double acc = 0.0;
      for (std::size_t t = 0; t + lag < n; ++t) acc += centered[t] * centered[t + lag];
      r[lag] = acc / denom;
    }
  } else {
    const std::size_t nfft = detail::next_pow2(2 * n);
    auto spec = detail::rfft(centered, nfft);
    for (auto& c : spec) c = std::norm(c);
    const auto acov = detail::irfft(spec, nfft);
    for (std::size_t lag = 0; lag <= max_lag; ++lag) r[lag] = acov[lag] / acov[0];
  }
  r[0] = 1.0;
  return r;
}

namespace {

std::vector<double> window_weights(SpectrumWindow window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == SpectrumWindow::kHann && n > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  return w;
}

std::vector<double> one_sided_density(std::span<const double> segment, const std::vector<double>& w, double fs) {
  const std::size_t n = segment.size();
  std::vector<double> tapered(n);
  double wss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tapered[i] = segment[i] * w[i];
    wss += w[i] * w[i];
  }
  const auto spec = detail::rfft(tapered, n);
  std::vector<double> p(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    p[k] = std::norm(spec[k]) / (fs * wss) * (unpaired ? 1.0 : 2.0);
  }
  return p;
}

}  // namespace

PowerSpectrum power_spectrum(const SampledSignal& signal, const SpectrumOptions& options) {
  const auto& x = signal.samples();
  const std::size_t n = x.size();
  if (n < 8) throw Error(ErrorCode::kInsufficientData, "power spectrum needs at least 8 samples");
  const double fs = signal.sample_rate_hz();

  std::size_t seg_len = n;
  std::size_t step = n;
  std::size_t n_seg = 1;
  if (options.estimator == SpectrumEstimator::kWelch && options.welch_segments >= 2) {
    const std::size_t len = 2 * n / static_cast<std::size_t>(options.welch_segments + 1);
    if (len >= 8) {
      seg_len = len;
      step = len / 2;
      n_seg = (n - seg_len) / step + 1;
    }
  }

  const auto w = window_weights(options.window, seg_len);
  PowerSpectrum out;
  out.power.assign(seg_len / 2 + 1, 0.0);
  for (std::size_t s = 0; s < n_seg; ++s) {
    const auto p = one_sided_density(std::span<const double>(x).subspan(s * step, seg_len), w, fs);
    for (std::size_t k = 0; k < p.size(); ++k) out.power[k] += p[k] / static_cast<double>(n_seg);
  }
  out.freqs_hz.resize(out.power.size());
  for (std::size_t k = 0; k < out.freqs_hz.size(); ++k) {
    out.freqs_hz[k] = static_cast<double>(k) * fs / static_cast<double>(seg_len);
  }
  return out;
}

double band_power(const PowerSpectrum& spec, double lo_hz, double hi_hz) {
  if (!(lo_hz >= 0.0) || !(lo_hz < hi_hz)) throw Error(ErrorCode::kInvalidParameter, "band requires 0 <= lo < hi");
  const double df = spec.resolution_hz();
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.freqs_hz.size(); ++k) {
    if (spec.freqs_hz[k] >= lo_hz && spec.freqs_hz[k] < hi_hz) acc += spec.power[k] * df;
  }
  return acc;
}

double total_power(const PowerSpectrum& spec) {
  return std::accumulate(spec.power.begin(), spec.power.end(), 0.0) * spec.resolution_hz();
}

}  // namespace painbvp
