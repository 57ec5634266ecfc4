#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "painbvp/beat_ibi.hpp"

namespace painbvp {

/// A feature value, or nullopt when the input cannot support it.
using Feature = std::optional<double>;

inline constexpr std::size_t kHrvFeatureCount = 20;

/// Canonical column names, in export order.
inline constexpr std::array<std::string_view, kHrvFeatureCount> kHrvFeatureNames = {
    "rmssd_ms", "sdsd_ms",  "pnn50_pct", "pnn25_pct", "pnn10_pct", "rr_mean_ms", "rr_std_ms",
    "rr_med_ms", "rr_min_ms", "rr_max_ms", "vlf_pow",  "lf_pow",    "hf_pow",     "total_pow",
    "sd1_ms",   "sd2_ms",   "sd12_ratio", "sdell_ms2", "dfa_alpha1", "apen"};

struct TimeDomainHrv {
  Feature rmssd_ms, sdsd_ms, pnn50_pct, pnn25_pct, pnn10_pct;
  Feature rr_mean_ms, rr_std_ms, rr_med_ms, rr_min_ms, rr_max_ms;
};

struct FrequencyDomainHrv {
  Feature vlf_pow, lf_pow, hf_pow, total_pow;
};

struct PoincareHrv {
  Feature sd1_ms, sd2_ms, sd12_ratio, sdell_ms2;
};

struct HrvFeatures {
  TimeDomainHrv time;
  FrequencyDomainHrv freq;
  PoincareHrv poincare;
  Feature dfa_alpha1;
  Feature apen;

  std::array<Feature, kHrvFeatureCount> to_array() const;
};

struct HrvOptions {
  double resample_hz = 4.0;
  double vlf_lo_hz = 0.003;
  double lf_lo_hz = 0.04;
  double hf_lo_hz = 0.15;
  double hf_hi_hz = 0.4;
  int apen_m = 2;
  double apen_r_factor = 0.2;
  std::size_t dfa_min_box = 4;
  std::size_t dfa_max_box = 16;
};

/// Requires >= 3 intervals, otherwise every field is undefined. pNNx uses a
/// strict "differs by more than x ms" comparison.
TimeDomainHrv time_domain_hrv(const IbiSeries& ibi);

/// Tachogram cubic-spline resampled, mean removed, periodogram band powers.
FrequencyDomainHrv frequency_domain_hrv(const IbiSeries& ibi, const HrvOptions& options = {});

PoincareHrv poincare(const IbiSeries& ibi);

/// DFA short-term exponent. Undefined below 16 intervals or when fewer than
/// two box sizes fit.
Feature dfa_alpha1(std::span<const double> intervals_ms, const HrvOptions& options = {});

/// Pincus approximate entropy with self-matches and Chebyshev distance.
/// Zero variance yields 0.
Feature approx_entropy(std::span<const double> intervals_ms, int m = 2, double r_factor = 0.2);

HrvFeatures hrv_feature_vector(const IbiSeries& ibi, const HrvOptions& options = {});

/// Natural cubic spline through (t, y) evaluated at `query` points.
std::vector<double> natural_cubic_spline(std::span<const double> t, std::span<const double> y,
                                         std::span<const double> query);

}  // namespace painbvp
