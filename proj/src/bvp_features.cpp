#include "painbvp/bvp_features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "painbvp/error.hpp"

namespace painbvp {

std::size_t bvp_feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kBvpFeatureNames.size(); ++i) {
    if (kBvpFeatureNames[i] == name) return i;
  }
  throw Error(ErrorCode::kInvalidParameter, "unknown BVP feature '" + std::string(name) + "'");
}

namespace {

void require_length(std::span<const double> x, std::size_t min_len, const char* what) {
  if (x.size() < min_len) {
    throw Error(ErrorCode::kInsufficientData, std::string(what) + " needs at least " + std::to_string(min_len) + " samples");
  }
}

void require_nonconstant(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) throw Error(ErrorCode::kDegenerateInput, "constant input");
}

std::size_t first_1e_crossing(std::span<const double> acf, std::size_t fallback) {
  const double threshold = std::exp(-1.0);
  for (std::size_t lag = 1; lag < acf.size(); ++lag) {
    if (acf[lag] < threshold) return lag;
  }
  return fallback;
}

std::size_t first_minimum(std::span<const double> acf, std::size_t fallback) {
  for (std::size_t lag = 1; lag + 1 < acf.size(); ++lag) {
    if (acf[lag] < acf[lag - 1] && acf[lag] < acf[lag + 1]) return lag;
  }
  return fallback;
}

// Autocorrelation over lags 0..len/2.
std::vector<double> half_acf(std::span<const double> x) { return autocorrelation(x, x.size() / 2); }

double ami_first_min_from_acf(std::span<const double> acf, std::size_t n) {
  const std::size_t max_lag = std::min<std::size_t>(40, (n + 1) / 2);
  std::vector<double> ami(max_lag);
  for (std::size_t i = 0; i < max_lag; ++i) {
    const double r = i + 1 < acf.size() ? acf[i + 1] : 0.0;
    ami[i] = -0.5 * std::log(std::max(1e-300, 1.0 - r * r));
  }
  for (std::size_t i = 1; i + 1 < max_lag; ++i) {
    if (ami[i] < ami[i - 1] && ami[i] < ami[i + 1]) return static_cast<double>(i + 1);
  }
  return static_cast<double>(max_lag);
}

double embed2_expfit_with_tau(std::span<const double> x, std::size_t tau) {
  const std::size_t n = x.size();
  tau = std::max<std::size_t>(1, std::min(tau, n / 10));
  std::vector<double> d;
  d.reserve(n - tau - 1);
  for (std::size_t i = 0; i + tau + 1 < n; ++i) {
    const double dx = x[i + 1] - x[i];
    const double dy = x[i + tau + 1] - x[i + tau];
    d.push_back(std::sqrt(dx * dx + dy * dy));
  }
  const double scale = mean(d);
  const auto [lo_it, hi_it] = std::minmax_element(d.begin(), d.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double sd = stddev(d, 1);
  std::size_t bins = 1;
  if (sd >= 0.001 && hi > lo) {
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / (3.5 * sd / std::cbrt(static_cast<double>(d.size())))));
    bins = std::max<std::size_t>(bins, 1);
  }
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  std::vector<double> counts(bins, 0.0);
  for (double v : d) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(b, bins - 1)] += 1.0;
  }
  double acc = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double centre = lo + (static_cast<double>(b) + 0.5) * width;
    const double density = scale > 0.0 ? std::exp(-centre / scale) / scale : 0.0;
    acc += std::abs(counts[b] / static_cast<double>(d.size()) - density);
  }
  return acc / static_cast<double>(bins);
}

double linear_slope(std::span<const double> x, std::span<const double> y, double* intercept) {
  const double xm = mean(x);
  const double ym = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - xm) * (y[i] - ym);
    sxx += (x[i] - xm) * (x[i] - xm);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  if (intercept != nullptr) *intercept = ym - slope * xm;
  return slope;
}

enum class Fluctuation { kDfa, kRescaledRange };

double fluctuation_prop(std::span<const double> x, Fluctuation how) {
  const std::size_t n = x.size();
  constexpr int kSteps = 50;
  const double lin_lo = std::log(5.0);
  const double lin_hi = std::log(static_cast<double>(n / 2));
  const double step = (lin_hi - lin_lo) / (kSteps - 1);
  std::vector<std::size_t> taus;
  for (int i = 0; i < kSteps; ++i) {
    const auto tau = static_cast<std::size_t>(std::lround(std::exp(lin_lo + i * step)));
    if (taus.empty() || taus.back() != tau) taus.push_back(tau);
  }
  if (taus.size() < 12) return 0.0;

  // The DFA variant integrates every second sample.
  const std::size_t lag = how == Fluctuation::kDfa ? 2 : 1;
  std::vector<double> profile(n / lag);
  double cum = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) profile[i] = cum += x[i * lag];

  std::vector<double> log_tau, log_f;
  std::vector<double> xreg(taus.back());
  std::iota(xreg.begin(), xreg.end(), 1.0);
  for (std::size_t tau : taus) {
    const std::size_t n_buffer = profile.size() / tau;
    double f = 0.0;
    for (std::size_t j = 0; j < n_buffer; ++j) {
      std::span<const double> seg(profile.data() + j * tau, tau);
      double b = 0.0;
      const double m = linear_slope(std::span<const double>(xreg.data(), tau), seg, &b);
      double rmin = INFINITY, rmax = -INFINITY, ss = 0.0;
      for (std::size_t k = 0; k < tau; ++k) {
        const double r = seg[k] - (static_cast<double>(k + 1) * m + b);
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
        ss += r * r;
      }
      f += how == Fluctuation::kDfa ? ss : (rmax - rmin) * (rmax - rmin);
    }
    f = how == Fluctuation::kDfa ? std::sqrt(f / static_cast<double>(n_buffer * tau))
                                 : std::sqrt(f / static_cast<double>(n_buffer));
    log_tau.push_back(std::log(static_cast<double>(tau)));
    log_f.push_back(std::log(f));
  }

  // Two-segment linear fit sharing one breakpoint sample; the first
  // minimiser of the summed residual norms marks the end of the first regime.
  const std::size_t ntt = log_tau.size();
  constexpr std::size_t kMinPoints = 6;
  double best = INFINITY;
  std::size_t best_index = 0;
  for (std::size_t i = kMinPoints; i + kMinPoints <= ntt; ++i) {
    double err = 0.0;
    for (auto [begin, count] : {std::pair{std::size_t{0}, i}, std::pair{i - 1, ntt - i + 1}}) {
      std::span<const double> lx(log_tau.data() + begin, count);
      std::span<const double> ly(log_f.data() + begin, count);
      double b = 0.0;
      const double m = linear_slope(lx, ly, &b);
      double ss = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        const double r = lx[k] * m + b - ly[k];
        ss += r * r;
      }
      err += std::sqrt(ss);
    }
    if (err < best) {
      best = err;
      best_index = i - 1;
    }
  }
  return static_cast<double>(best_index + 1) / static_cast<double>(ntt);
}

std::size_t periodicity_from_acf(std::span<const double> acf, std::size_t n) {
  const double threshold = std::max(0.01, 4.0 / std::sqrt(static_cast<double>(n)));
  std::size_t last_trough = 0;
  bool have_trough = false;
  for (std::size_t i = 1; i + 1 < acf.size(); ++i) {
    const double slope_in = acf[i] - acf[i - 1];
    const double slope_out = acf[i + 1] - acf[i];
    if (slope_in < 0.0 && slope_out > 0.0) {
      last_trough = i;
      have_trough = true;
    } else if (slope_in > 0.0 && slope_out < 0.0 && have_trough) {
      if (acf[i] > threshold && acf[i] - acf[last_trough] > threshold) return i;
    }
  }
  return 0;
}

std::vector<double> linear_detrend(std::span<const double> x) {
  std::vector<double> t(x.size());
  std::iota(t.begin(), t.end(), 0.0);
  double b = 0.0;
  const double m = linear_slope(t, x, &b);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - (m * t[i] + b);
  return out;
}

std::vector<int> tercile_letters(std::span<const double> x) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double q1 = quantile(1.0 / 3.0);
  const double q2 = quantile(2.0 / 3.0);
  std::vector<int> letters(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) letters[i] = x[i] <= q1 ? 0 : (x[i] <= q2 ? 1 : 2);
  return letters;
}

}  // namespace

double histogram_mode(std::span<const double> x, std::size_t bins) {
  require_length(x, 10, "histogram mode");
  const auto z = zscore(x);
  const auto [lo_it, hi_it] = std::minmax_element(z.begin(), z.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : z) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    ++counts[std::min(b, bins - 1)];
  }
  const auto best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  return lo + (static_cast<double>(best) + 0.5) * width;
}

HistogramModes histogram_modes(std::span<const double> x) { return {histogram_mode(x, 5), histogram_mode(x, 10)}; }

AcfTimescales acf_timescales(std::span<const double> x) {
  require_length(x, 16, "ACF timescales");
  require_nonconstant(x);
  const auto acf = half_acf(x);
  const std::size_t fallback = x.size() / 2;
  return {first_1e_crossing(acf, fallback), first_minimum(acf, fallback)};
}

double auto_mutual_information(std::span<const double> x, std::size_t tau, std::size_t bins) {
  if (x.size() <= tau + 10) throw Error(ErrorCode::kInsufficientData, "AMI needs len > tau + 10");
  if (bins < 2) throw Error(ErrorCode::kInvalidParameter, "AMI needs at least 2 bins");
  require_nonconstant(x);
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / static_cast<double>(bins);
  auto bin_of = [&](double v) { return std::min(static_cast<std::size_t>((v - lo) / width), bins - 1); };

  const std::size_t pairs = x.size() - tau;
  std::vector<double> joint(bins * bins, 0.0), left(bins, 0.0), right(bins, 0.0);
  for (std::size_t t = 0; t < pairs; ++t) {
    const std::size_t a = bin_of(x[t]);
    const std::size_t b = bin_of(x[t + tau]);
    joint[a * bins + b] += 1.0;
    left[a] += 1.0;
    right[b] += 1.0;
  }
  const double total = static_cast<double>(pairs);
  double mi = 0.0;
  for (std::size_t a = 0; a < bins; ++a) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double p = joint[a * bins + b] / total;
      if (p > 0.0) mi += p * std::log2(p / ((left[a] / total) * (right[b] / total)));
    }
  }
  return std::max(0.0, mi);
}

double below_mean_event_interval(std::span<const double> x) {
  require_length(x, 16, "extreme-event interval");
  const double threshold = mean(x) - stddev(x, 0);
  std::vector<std::size_t> events;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < threshold) events.push_back(i);
  }
  if (events.size() < 2) return static_cast<double>(x.size());
  return static_cast<double>(events.back() - events.front()) / static_cast<double>(events.size() - 1);
}

SpectralSummaries spectral_summaries(std::span<const double> x, double sample_rate_hz) {
  require_length(x, 32, "spectral summaries");
  const auto spec = power_spectrum(SampledSignal(sample_rate_hz, std::vector<double>(x.begin(), x.end())));
  const double cutoff = sample_rate_hz / 2.0 / 5.0;
  double total = 0.0, low = 0.0, weighted = 0.0;
  for (std::size_t k = 0; k < spec.power.size(); ++k) {
    total += spec.power[k];
    weighted += spec.freqs_hz[k] * spec.power[k];
    if (spec.freqs_hz[k] < cutoff) low += spec.power[k];
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kDegenerateInput, "zero total spectral power");
  return {low / total, weighted / total};
}

ForecastTrev forecast_and_trev(std::span<const double> x) {
  require_length(x, 16, "forecast statistics");
  require_nonconstant(x);
  ForecastTrev out{};
  double err = 0.0;
  for (std::size_t t = 3; t < x.size(); ++t) {
    err += std::abs(x[t] - (x[t - 1] + x[t - 2] + x[t - 3]) / 3.0);
  }
  out.rollmean3_err = err / static_cast<double>(x.size() - 3);

  std::vector<double> diffs(x.size() - 1);
  for (std::size_t t = 0; t + 1 < x.size(); ++t) diffs[t] = x[t + 1] - x[t];
  double m2 = 0.0, m3 = 0.0;
  for (double d : diffs) {
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(diffs.size());
  m3 /= static_cast<double>(diffs.size());
  out.trev = m3 / std::pow(m2, 1.5);

  const auto [lo, hi] = std::minmax_element(diffs.begin(), diffs.end());
  if (*lo != *hi) {
    const auto before = first_1e_crossing(half_acf(x), x.size() / 2);
    const auto after = first_1e_crossing(half_acf(diffs), diffs.size() / 2);
    out.tau_resrat = static_cast<double>(after) / static_cast<double>(before);
  }
  return out;
}

SymbolicStats symbolic_stats(std::span<const double> x) {
  require_length(x, 32, "symbolic statistics");
  require_nonconstant(x);
  SymbolicStats out{};
  const double sd = stddev(x, 0);
  std::size_t exceed = 0, run = 0, longest = 0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double d = x[t] - x[t - 1];
    if (std::abs(d) > 0.04 * sd) ++exceed;
    run = d < 0.0 ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  out.md_pnn40 = static_cast<double>(exceed) / static_cast<double>(x.size() - 1);
  out.longest_decrease_run = longest;

  const auto letters = tercile_letters(x);
  double pair_counts[3][3] = {};
  for (std::size_t t = 0; t + 1 < letters.size(); ++t) pair_counts[letters[t]][letters[t + 1]] += 1.0;
  const double transitions = static_cast<double>(letters.size() - 1);
  double entropy = 0.0;
  for (auto& row : pair_counts) {
    for (double& c : row) {
      c /= transitions;
      if (c > 0.0) entropy -= c * std::log2(c);
    }
  }
  out.motif3_entropy = entropy;

  double trace = 0.0;
  for (int col = 0; col < 3; ++col) {
    const double m = (pair_counts[0][col] + pair_counts[1][col] + pair_counts[2][col]) / 3.0;
    double ss = 0.0;
    for (int row = 0; row < 3; ++row) ss += (pair_counts[row][col] - m) * (pair_counts[row][col] - m);
    trace += ss / 2.0;
  }
  out.transmat3_trace_cov = trace;
  return out;
}

std::size_t periodicity_wang(std::span<const double> x) {
  require_length(x, 64, "periodicity");
  const auto detrended = linear_detrend(x);
  const auto [lo, hi] = std::minmax_element(detrended.begin(), detrended.end());
  if (!(*hi - *lo > 1e-12 * (1.0 + std::abs(*hi)))) return 0;
  const std::size_t max_lag = (x.size() + 2) / 3;
  return periodicity_from_acf(autocorrelation(detrended, max_lag), x.size());
}

double embed2_expfit(std::span<const double> x) {
  require_length(x, 64, "embedding exponential fit");
  require_nonconstant(x);
  return embed2_expfit_with_tau(x, first_1e_crossing(half_acf(x), x.size() / 2));
}

double ami_first_min_lag(std::span<const double> x) {
  require_length(x, 4, "AMI first minimum");
  require_nonconstant(x);
  return ami_first_min_from_acf(half_acf(x), x.size());
}

std::optional<FluctuationProps> fluctuation_props(std::span<const double> x) {
  if (x.size() < 64) return std::nullopt;
  return FluctuationProps{fluctuation_prop(x, Fluctuation::kDfa), fluctuation_prop(x, Fluctuation::kRescaledRange)};
}

namespace {

template <typename Fn>
void guarded(Fn&& fn) {
  try {
    fn();
  } catch (const Error&) {
    // Leave the affected fields undefined.
  }
}

}  // namespace

BvpFeatures bvp_feature_vector(const SampledSignal& window, const BvpOptions& options) {
  BvpFeatures out;
  const auto& raw = window.samples();
  auto set = [&](std::string_view name, double v) { out.values[bvp_feature_index(name)] = v; };
  if (raw.empty()) return out;
  set("mean", mean(raw));
  set("std", stddev(raw, 1));

  std::vector<double> z;
  try {
    z = zscore(raw);
  } catch (const Error&) {
    return out;
  }
  const std::size_t n = z.size();

  guarded([&] {
    const auto modes = histogram_modes(z);
    set("dn_hist_mode5", modes.mode5);
    set("dn_hist_mode10", modes.mode10);
  });

  std::vector<double> acf;
  guarded([&] {
    require_length(z, 16, "ACF timescales");
    acf = half_acf(z);
    const auto f1e = first_1e_crossing(acf, n / 2);
    set("acf_first_1e_crossing", static_cast<double>(f1e));
    set("acf_first_1e_crossing_dup", static_cast<double>(f1e));
    set("acf_first_min", static_cast<double>(first_minimum(acf, n / 2)));
    set("ami_first_min_lag", ami_first_min_from_acf(acf, n));
  });
  guarded([&] {
    const double ami = auto_mutual_information(z, options.ami_tau, options.ami_bins);
    set("ami2_tau5", ami);
    set("ami2_tau5_dup", ami);
  });
  guarded([&] { set("below_mean_event_interval", below_mean_event_interval(z)); });
  guarded([&] {
    const auto s = spectral_summaries(z, window.sample_rate_hz());
    set("spow_lowest_fifth", s.power_lowest_fifth);
    set("spow_centroid", s.centroid_hz);
  });
  guarded([&] {
    const auto f = forecast_and_trev(z);
    set("fc_rollmean3_err", f.rollmean3_err);
    set("co_trev", f.trev);
    if (f.tau_resrat) set("fc_tau_resrat", *f.tau_resrat);
  });
  guarded([&] {
    const auto s = symbolic_stats(z);
    set("md_pnn40", s.md_pnn40);
    set("sb_longest_decrease_run", static_cast<double>(s.longest_decrease_run));
    set("sb_motif3_entropy", s.motif3_entropy);
    set("sb_transmat3_trace_cov", s.transmat3_trace_cov);
  });
  guarded([&] { set("sb_periodicity_wang", static_cast<double>(periodicity_wang(z))); });
  guarded([&] {
    if (acf.empty()) return;
    require_length(z, 64, "embedding exponential fit");
    set("co_embed2_expfit", embed2_expfit_with_tau(z, first_1e_crossing(acf, n / 2)));
  });
  guarded([&] {
    if (auto f = fluctuation_props(z)) {
      set("sc_dfa_prop", f->dfa_prop);
      set("sc_rs_prop", f->rs_prop);
    }
  });
  return out;
}

}  // namespace painbvp
