#include "painbvp/hrv_features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "painbvp/error.hpp"

namespace painbvp {

std::array<Feature, kHrvFeatureCount> HrvFeatures::to_array() const {
  return {time.rmssd_ms,  time.sdsd_ms,   time.pnn50_pct,  time.pnn25_pct,   time.pnn10_pct,
          time.rr_mean_ms, time.rr_std_ms, time.rr_med_ms,  time.rr_min_ms,   time.rr_max_ms,
          freq.vlf_pow,   freq.lf_pow,    freq.hf_pow,     freq.total_pow,   poincare.sd1_ms,
          poincare.sd2_ms, poincare.sd12_ratio, poincare.sdell_ms2, dfa_alpha1, apen};
}

namespace {

std::vector<double> successive_differences(std::span<const double> x) {
  std::vector<double> d;
  if (x.size() < 2) return d;
  d.reserve(x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i) d.push_back(x[i] - x[i - 1]);
  return d;
}

double percent_exceeding(std::span<const double> diffs, double threshold_ms) {
  const auto count = std::count_if(diffs.begin(), diffs.end(), [&](double d) { return std::abs(d) > threshold_ms; });
  return 100.0 * static_cast<double>(count) / static_cast<double>(diffs.size());
}

}  // namespace

TimeDomainHrv time_domain_hrv(const IbiSeries& ibi) {
  TimeDomainHrv out;
  const auto& rr = ibi.intervals_ms;
  if (rr.size() < 3) return out;
  const auto diffs = successive_differences(rr);
  double sq = 0.0;
  for (double d : diffs) sq += d * d;
  out.rmssd_ms = std::sqrt(sq / static_cast<double>(diffs.size()));
  out.sdsd_ms = stddev(diffs, 1);
  out.pnn50_pct = percent_exceeding(diffs, 50.0);
  out.pnn25_pct = percent_exceeding(diffs, 25.0);
  out.pnn10_pct = percent_exceeding(diffs, 10.0);
  out.rr_mean_ms = mean(rr);
  out.rr_std_ms = stddev(rr, 1);
  out.rr_med_ms = median(rr);
  const auto [lo, hi] = std::minmax_element(rr.begin(), rr.end());
  out.rr_min_ms = *lo;
  out.rr_max_ms = *hi;
  return out;
}

std::vector<double> natural_cubic_spline(std::span<const double> t, std::span<const double> y,
                                         std::span<const double> query) {
  const std::size_t n = t.size();
  if (n != y.size() || n < 2) throw Error(ErrorCode::kInvalidParameter, "spline needs >= 2 matching knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(t[i] > t[i - 1])) throw Error(ErrorCode::kInvalidInput, "spline knots must be strictly ascending");
  }
  // Second derivatives m[i] with m[0] = m[n-1] = 0, Thomas algorithm.
  std::vector<double> m(n, 0.0);
  if (n > 2) {
    std::vector<double> diag(n - 2), upper(n - 2), rhs(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = t[i] - t[i - 1];
      const double h1 = t[i + 1] - t[i];
      diag[i - 1] = 2.0 * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < n - 2; ++i) {
      const double lower = t[i + 1] - t[i];
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i-- > 0;) {
      const double next = i + 1 < n - 2 ? m[i + 2] : 0.0;
      m[i + 1] = (rhs[i] - upper[i] * next) / diag[i];
    }
  }

  std::vector<double> out;
  out.reserve(query.size());
  for (double q : query) {
    auto it = std::upper_bound(t.begin(), t.end(), q);
    std::size_t k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    k = std::min(k, n - 2);
    const double h = t[k + 1] - t[k];
    const double a = (t[k + 1] - q) / h;
    const double b = (q - t[k]) / h;
    out.push_back(a * y[k] + b * y[k + 1] + ((a * a * a - a) * m[k] + (b * b * b - b) * m[k + 1]) * h * h / 6.0);
  }
  return out;
}

FrequencyDomainHrv frequency_domain_hrv(const IbiSeries& ibi, const HrvOptions& options) {
  FrequencyDomainHrv out;
  const auto& rr = ibi.intervals_ms;
  const auto& times = ibi.interval_end_s;
  if (rr.size() < 4 || times.size() != rr.size()) return out;
  const double span = times.back() - times.front();
  if (span < 2.5) return out;

  const auto count = static_cast<std::size_t>(std::floor(span * options.resample_hz + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = times.front() + static_cast<double>(i) / options.resample_hz;
  if (grid.size() < 8) return out;
  auto tachogram = natural_cubic_spline(times, rr, grid);
  const double m = mean(tachogram);
  for (double& v : tachogram) v -= m;

  const auto spec = power_spectrum(SampledSignal(options.resample_hz, std::move(tachogram)));
  out.vlf_pow = band_power(spec, options.vlf_lo_hz, options.lf_lo_hz);
  out.lf_pow = band_power(spec, options.lf_lo_hz, options.hf_lo_hz);
  out.hf_pow = band_power(spec, options.hf_lo_hz, options.hf_hi_hz);
  out.total_pow = band_power(spec, options.vlf_lo_hz, options.hf_hi_hz);
  return out;
}

PoincareHrv poincare(const IbiSeries& ibi) {
  PoincareHrv out;
  const auto& rr = ibi.intervals_ms;
  if (rr.size() < 3) return out;
  const auto diffs = successive_differences(rr);
  const double var_diff = variance(diffs, 0);
  const double var_rr = variance(rr, 0);
  const double sd1 = std::sqrt(var_diff / 2.0);
  const double sd2 = std::sqrt(std::max(0.0, 2.0 * var_rr - var_diff / 2.0));
  out.sd1_ms = sd1;
  out.sd2_ms = sd2;
  if (sd2 > 0.0) out.sd12_ratio = sd1 / sd2;
  out.sdell_ms2 = std::numbers::pi * sd1 * sd2;
  return out;
}

Feature dfa_alpha1(std::span<const double> intervals_ms, const HrvOptions& options) {
  const std::size_t n = intervals_ms.size();
  if (n < 16) return std::nullopt;
  const std::size_t max_box = std::min(options.dfa_max_box, n / 4);
  if (max_box < options.dfa_min_box + 1) return std::nullopt;

  const double m = mean(intervals_ms);
  std::vector<double> profile(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += intervals_ms[i] - m;
    profile[i] = acc;
  }

  std::vector<double> log_n, log_f;
  for (std::size_t box = options.dfa_min_box; box <= max_box; ++box) {
    const std::size_t n_boxes = n / box;
    // x = 0..box-1 is shared by every box, so its moments are fixed.
    const double xm = static_cast<double>(box - 1) / 2.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < box; ++i) sxx += (static_cast<double>(i) - xm) * (static_cast<double>(i) - xm);
    double ss = 0.0;
    for (std::size_t b = 0; b < n_boxes; ++b) {
      const double* seg = profile.data() + b * box;
      double ym = 0.0;
      for (std::size_t i = 0; i < box; ++i) ym += seg[i];
      ym /= static_cast<double>(box);
      double sxy = 0.0;
      for (std::size_t i = 0; i < box; ++i) sxy += (static_cast<double>(i) - xm) * (seg[i] - ym);
      const double slope = sxy / sxx;
      for (std::size_t i = 0; i < box; ++i) {
        const double r = seg[i] - (ym + slope * (static_cast<double>(i) - xm));
        ss += r * r;
      }
    }
    const double f = std::sqrt(ss / static_cast<double>(n_boxes * box));
    if (!(f > 0.0)) return std::nullopt;
    log_n.push_back(std::log(static_cast<double>(box)));
    log_f.push_back(std::log(f));
  }
  const double xm = mean(log_n);
  const double ym = mean(log_f);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    sxy += (log_n[i] - xm) * (log_f[i] - ym);
    sxx += (log_n[i] - xm) * (log_n[i] - xm);
  }
  return sxy / sxx;
}

namespace {

double phi(std::span<const double> x, std::size_t m, double r) {
  const std::size_t count = x.size() - m + 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t matches = 0;
    for (std::size_t j = 0; j < count; ++j) {
      double dist = 0.0;
      for (std::size_t k = 0; k < m; ++k) dist = std::max(dist, std::abs(x[i + k] - x[j + k]));
      if (dist <= r) ++matches;
    }
    acc += std::log(static_cast<double>(matches) / static_cast<double>(count));
  }
  return acc / static_cast<double>(count);
}

}  // namespace

Feature approx_entropy(std::span<const double> intervals_ms, int m, double r_factor) {
  if (m < 1 || intervals_ms.size() < static_cast<std::size_t>(m) + 2) return std::nullopt;
  const double sd = stddev(intervals_ms, 1);
  if (!(sd > 0.0)) return 0.0;
  const double r = r_factor * sd;
  const auto mm = static_cast<std::size_t>(m);
  return phi(intervals_ms, mm, r) - phi(intervals_ms, mm + 1, r);
}

HrvFeatures hrv_feature_vector(const IbiSeries& ibi, const HrvOptions& options) {
  HrvFeatures out;
  out.time = time_domain_hrv(ibi);
  out.freq = frequency_domain_hrv(ibi, options);
  out.poincare = poincare(ibi);
  out.dfa_alpha1 = dfa_alpha1(ibi.intervals_ms, options);
  out.apen = approx_entropy(ibi.intervals_ms, options.apen_m, options.apen_r_factor);
  return out;
}

}  // namespace painbvp
