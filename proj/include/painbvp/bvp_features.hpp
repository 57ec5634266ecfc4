#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "painbvp/hrv_features.hpp"
#include "painbvp/signal.hpp"

namespace painbvp {

inline constexpr std::size_t kBvpFeatureCount = 24;

// Column order follows the BVP feature table. The two `_dup` columns mirror
// their canonical twins; the table lists those rows twice.
inline constexpr std::array<std::string_view, kBvpFeatureCount> kBvpFeatureNames = {
    "mean",
    "std",
    "dn_hist_mode5",
    "dn_hist_mode10",
    "acf_first_1e_crossing",
    "ami2_tau5",
    "below_mean_event_interval",
    "acf_first_1e_crossing_dup",
    "acf_first_min",
    "spow_lowest_fifth",
    "spow_centroid",
    "fc_rollmean3_err",
    "co_trev",
    "ami2_tau5_dup",
    "ami_first_min_lag",
    "md_pnn40",
    "sb_longest_decrease_run",
    "sb_motif3_entropy",
    "sb_transmat3_trace_cov",
    "sb_periodicity_wang",
    "fc_tau_resrat",
    "co_embed2_expfit",
    "sc_dfa_prop",
    "sc_rs_prop",
};

std::size_t bvp_feature_index(std::string_view name);

struct BvpFeatures {
  std::array<Feature, kBvpFeatureCount> values;

  const Feature& operator[](std::string_view name) const { return values[bvp_feature_index(name)]; }
};

struct BvpOptions {
  std::size_t ami_tau = 5;
  std::size_t ami_bins = 10;
};

struct HistogramModes {
  double mode5;
  double mode10;
};
/// Centre of the most populated equal-width bin of the z-scored input;
/// ties resolve to the lowest bin.
HistogramModes histogram_modes(std::span<const double> x);
double histogram_mode(std::span<const double> x, std::size_t bins);

struct AcfTimescales {
  std::size_t first_1e_crossing;
  std::size_t first_min;
};
/// Both fall back to len/2 when no qualifying lag exists within len/2.
AcfTimescales acf_timescales(std::span<const double> x);

/// Histogram mutual information (bits) between x_t and x_{t+tau},
/// equal-width bins over [min, max] on both axes.
double auto_mutual_information(std::span<const double> x, std::size_t tau = 5, std::size_t bins = 10);

/// Mean spacing in samples between successive samples below mean - std.
/// Fewer than two events returns len.
double below_mean_event_interval(std::span<const double> x);

struct SpectralSummaries {
  double power_lowest_fifth;
  double centroid_hz;
};
SpectralSummaries spectral_summaries(std::span<const double> x, double sample_rate_hz);

struct ForecastTrev {
  double rollmean3_err;
  Feature tau_resrat;
  double trev;
};
ForecastTrev forecast_and_trev(std::span<const double> x);

struct SymbolicStats {
  double md_pnn40;
  std::size_t longest_decrease_run;
  double motif3_entropy;
  double transmat3_trace_cov;
};
SymbolicStats symbolic_stats(std::span<const double> x);

/// Lag of the first autocorrelation peak that follows a trough and clears
/// max(0.01, 4/sqrt(len)) both absolutely and above that trough; 0 if none.
std::size_t periodicity_wang(std::span<const double> x);

/// Mean absolute difference between the normalised histogram of successive
/// distances in the (x_t, x_{t+tau}) embedding and the fitted exponential density.
double embed2_expfit(std::span<const double> x);

/// First local minimum (lag) of the Gaussian-approximation auto-mutual
/// information over lags 1..40; 40 (or the capped maximum) if none.
double ami_first_min_lag(std::span<const double> x);

struct FluctuationProps {
  double dfa_prop;
  double rs_prop;
};
/// Proportion-of-scales statistics; nullopt below 64 samples.
std::optional<FluctuationProps> fluctuation_props(std::span<const double> x);

/// Mean and sample std on the raw window, every other feature on the
/// z-scored window. A constant window reports only mean and std.
BvpFeatures bvp_feature_vector(const SampledSignal& window, const BvpOptions& options = {});

}  // namespace painbvp
