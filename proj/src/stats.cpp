#include "painbvp/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "painbvp/error.hpp"
#include "painbvp/signal.hpp"
#include "painbvp/io.hpp"

namespace painbvp {

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) {
    // The alternating series converges slowly here; use the Jacobi theta form
    // P(K <= x) = sqrt(2 pi)/x * sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
    double cdf = 0.0;
    for (int k = 1; k < 20; ++k) {
      const double t = (2.0 * k - 1.0) * M_PI / x;
      cdf += std::exp(-t * t / 8.0);
    }
    return 1.0 - std::sqrt(2.0 * M_PI) / x * cdf;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_normality(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 8) throw Error(ErrorCode::kInsufficientData, "KS normality test needs at least 8 values");
  const double mu = mean(sample);
  const double sd = stddev(sample, 1);
  if (!(sd > 0.0)) throw Error(ErrorCode::kDegenerateInput, "KS normality test on a zero-variance sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  double d = 0.0;
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double cdf = 0.5 * std::erfc(-(sorted[i] - mu) / (sd * M_SQRT2));
    d = std::max({d, static_cast<double>(i + 1) / nn - cdf, cdf - static_cast<double>(i) / nn});
  }
  KsResult r;
  r.statistic = std::clamp(d, 0.0, 1.0);
  r.p_value = kolmogorov_sf(std::sqrt(nn) * r.statistic);
  return r;
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = r;
    i = j;
  }
  return ranks;
}

namespace {

struct Pooled {
  std::vector<double> rank_sums;
  std::vector<std::size_t> sizes;
  double n = 0.0;
  double tie_sum = 0.0;  // sum of t^3 - t over tie groups
};

Pooled pool(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error(ErrorCode::kInvalidInput, "need at least two groups");
  std::vector<double> all;
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error(ErrorCode::kInsufficientData, "every group needs at least two values");
    for (double v : g) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidInput, "non-finite value in group");
      all.push_back(v);
    }
  }
  const std::vector<double> ranks = midranks(all);
  Pooled p;
  p.n = static_cast<double>(all.size());
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += ranks[offset + i];
    p.rank_sums.push_back(s);
    p.sizes.push_back(g.size());
    offset += g.size();
  }
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j] == all[i]) ++j;
    const double t = static_cast<double>(j - i);
    p.tie_sum += t * t * t - t;
    i = j;
  }
  return p;
}

}  // namespace

KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  const Pooled p = pool(groups);
  const double correction = 1.0 - p.tie_sum / (p.n * p.n * p.n - p.n);
  if (!(correction > 0.0)) throw Error(ErrorCode::kDegenerateInput, "all values are identical");
  double h = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    h += p.rank_sums[g] * p.rank_sums[g] / static_cast<double>(p.sizes[g]);
  }
  h = 12.0 / (p.n * (p.n + 1.0)) * h - 3.0 * (p.n + 1.0);
  h = std::max(h / correction, 0.0);
  KruskalWallisResult r;
  r.h = h;
  r.df = groups.size() - 1;
  r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.df), 0.5 * h);
  return r;
}

DunnTable dunn_test(const std::vector<std::vector<double>>& groups) {
  const Pooled p = pool(groups);
  const double n = p.n;
  const double tie_term = p.tie_sum / (12.0 * (n - 1.0));
  const double base = n * (n + 1.0) / 12.0 - tie_term;
  if (!(base > 1e-12 * n * (n + 1.0) / 12.0)) {
    throw Error(ErrorCode::kUndefinedStatistic, "Dunn's test is undefined when every value is tied");
  }
  DunnTable table;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    table.mean_ranks.push_back(p.rank_sums[g] / static_cast<double>(p.sizes[g]));
  }
  const std::size_t k = groups.size();
  const double m = static_cast<double>(k * (k - 1) / 2);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      DunnResult r;
      r.group_i = i;
      r.group_j = j;
      const double se = std::sqrt(base * (1.0 / static_cast<double>(p.sizes[i]) + 1.0 / static_cast<double>(p.sizes[j])));
      r.z = (table.mean_ranks[i] - table.mean_ranks[j]) / se;
      r.p_value = std::clamp(std::erfc(std::abs(r.z) / M_SQRT2), 0.0, 1.0);
      r.p_adjusted = std::min(1.0, m * r.p_value);
      r.significant_at_0_05 = r.p_value < 0.05;
      table.pairs.push_back(r);
    }
  }
  return table;
}

FeaturePainAnalysis feature_pain_analysis(const Dataset& ds, std::string_view feature) {
  FeaturePainAnalysis out;
  out.feature = std::string(feature);
  const std::size_t col = feature_index(feature);
  std::vector<std::vector<double>> by_state(kPainStates.size());
  for (const auto& row : ds.rows) {
    if (row.is_synthetic) continue;
    by_state[static_cast<std::size_t>(row.pain_state)].push_back(row.features[col]);
  }
  std::vector<std::vector<double>> groups;
  std::vector<double> all;
  for (PainState s : kPainStates) {
    auto& g = by_state[static_cast<std::size_t>(s)];
    if (g.size() < 2) continue;
    out.states.push_back(s);
    out.counts.push_back(g.size());
    all.insert(all.end(), g.begin(), g.end());
    groups.push_back(std::move(g));
  }
  if (groups.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "feature '" + out.feature + "': fewer than two pain states with at least two rows");
  }
  try {
    out.normality = ks_normality(all);
  } catch (const Error&) {
  }
  DunnTable table;
  try {
    out.kruskal = kruskal_wallis(groups);
    table = dunn_test(groups);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateInput && e.code() != ErrorCode::kUndefinedStatistic) throw;
    out.degenerate = true;
    out.kruskal.reset();
    for (std::size_t i = 0; i < groups.size(); ++i) {
      for (std::size_t j = i + 1; j < groups.size(); ++j) table.pairs.push_back({i, j, 0.0, 1.0, 1.0, false});
    }
  }
  for (const auto& r : table.pairs) out.pairs.push_back({out.states[r.group_i], out.states[r.group_j], r});
  return out;
}

std::string dunn_csv(std::span<const FeaturePainAnalysis> analyses) {
  std::string out = "feature,pair,z,p,p_adj,significant\n";
  for (const auto& a : analyses) {
    for (const auto& pr : a.pairs) {
      out += a.feature + "," + std::string(to_string(pr.a)) + "-" + std::string(to_string(pr.b)) + "," +
             format_double(pr.dunn.z) + "," + format_double(pr.dunn.p_value) + "," +
             format_double(pr.dunn.p_adjusted) + "," + (pr.dunn.significant_at_0_05 ? "true" : "false") + "\n";
    }
  }
  return out;
}

}  // namespace painbvp
