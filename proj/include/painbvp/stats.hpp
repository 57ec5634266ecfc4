#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "painbvp/dataset.hpp"

namespace painbvp {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  /// Mean and std are estimated from the sample, so the asymptotic p-value
  /// is conservative.
  bool params_estimated = true;
};

/// One-sample KS against N(mean, sample std). Needs n >= 8; zero variance
/// throws kDegenerateInput.
KsResult ks_normality(std::span<const double> sample);

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_sf(double x);

/// Midranks (1-based) of the pooled values.
std::vector<double> midranks(std::span<const double> values);

struct KruskalWallisResult {
  double h = 0.0;
  double p_value = 1.0;
  std::size_t df = 0;
};

/// Tie-corrected H with a chi-square(k - 1) p-value. Needs >= 2 groups of
/// >= 2 values; all values identical throws kDegenerateInput.
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct DunnResult {
  std::size_t group_i = 0;
  std::size_t group_j = 0;
  double z = 0.0;  // (mean rank i - mean rank j) / se
  double p_value = 1.0;
  double p_adjusted = 1.0;  // Bonferroni over all pairs
  bool significant_at_0_05 = false;  // on the unadjusted p-value
};

struct DunnTable {
  std::vector<double> mean_ranks;
  std::vector<DunnResult> pairs;  // (0,1), (0,2), ..., (k-2,k-1)
};

/// Dunn's pairwise test on joint midranks with the tie term. All values
/// tied throws kUndefinedStatistic.
DunnTable dunn_test(const std::vector<std::vector<double>>& groups);

struct FeaturePairResult {
  PainState a;
  PainState b;
  DunnResult dunn;
};

struct FeaturePainAnalysis {
  std::string feature;
  std::vector<PainState> states;  // states with >= 2 rows, ascending
  std::vector<std::size_t> counts;
  std::optional<KsResult> normality;
  std::optional<KruskalWallisResult> kruskal;
  bool degenerate = false;  // every value tied; pairs reported with z = 0, p = 1
  std::vector<FeaturePairResult> pairs;
};

/// Dunn analysis of one feature across the pain states present.
FeaturePainAnalysis feature_pain_analysis(const Dataset& ds, std::string_view feature);

/// Rows `feature,pair,z,p,p_adj,significant` (header included).
std::string dunn_csv(std::span<const FeaturePainAnalysis> analyses);

}  // namespace painbvp
