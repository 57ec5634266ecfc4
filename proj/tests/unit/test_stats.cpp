#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "painbvp/stats.hpp"
#include "support.hpp"

using namespace painbvp;
using testing::error_code_of;

namespace {

std::vector<std::vector<double>> random_groups(Rng& rng, std::size_t k, double shift_step, bool coarse) {
  std::vector<std::vector<double>> groups(k);
  for (std::size_t g = 0; g < k; ++g) {
    const std::size_t n = 2 + rng.index(30);
    for (std::size_t i = 0; i < n; ++i) {
      double v = rng.normal() + shift_step * static_cast<double>(g);
      if (coarse) v = std::round(v * 2.0) / 2.0;
      groups[g].push_back(v);
    }
  }
  return groups;
}

}  // namespace

TEST_CASE("midranks") {
  const auto r = midranks(std::vector<double>{3.0, 1.0, 3.0, 2.0});
  CHECK(r == std::vector<double>{3.5, 1.0, 3.5, 2.0});
}

TEST_CASE("Dunn z matches the pairwise ranking oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto groups = random_groups(rng, 2 + rng.index(4), rng.uniform(0.0, 1.0), trial % 2 == 0);
    const auto got = dunn_test(groups);
    const auto want = oracle::dunn_z(groups);
    REQUIRE(got.pairs.size() == want.size());
    for (std::size_t p = 0; p < want.size(); ++p) {
      CHECK(std::abs(got.pairs[p].z - want[p].z) <= 1e-9);
      CHECK(std::abs(got.mean_ranks[got.pairs[p].group_i] - want[p].mean_rank_i) <= 1e-9);
      CHECK(got.pairs[p].p_value >= 0.0);
      CHECK(got.pairs[p].p_value <= 1.0);
      CHECK(got.pairs[p].p_adjusted >= got.pairs[p].p_value);
      CHECK(got.pairs[p].p_adjusted <= 1.0);
    }
    const auto kw = kruskal_wallis(groups);
    CHECK(std::abs(kw.h - oracle::kruskal_h(groups)) <= 1e-9 * std::max(1.0, kw.h));
    CHECK(kw.df == groups.size() - 1);
  }
}

TEST_CASE("identical groups give p = 1") {
  const std::vector<double> g{1.0, 4.0, 2.0, 8.0, 5.0};
  const auto d = dunn_test({g, g, g});
  for (const auto& p : d.pairs) {
    CHECK(p.z == 0.0);
    CHECK(p.p_value == 1.0);
    CHECK(p.p_adjusted == 1.0);
  }
  CHECK(kruskal_wallis({g, g}).p_value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("planted shifts are detected") {
  Rng rng(2);
  std::vector<std::vector<double>> groups(3);
  for (std::size_t g = 0; g < 3; ++g) {
    for (int i = 0; i < 40; ++i) groups[g].push_back(rng.normal() + 2.0 * static_cast<double>(g));
  }
  const auto d = dunn_test(groups);
  for (const auto& p : d.pairs) {
    CHECK(p.p_value < 0.05);
    CHECK(p.significant_at_0_05);
  }
  CHECK(kruskal_wallis(groups).p_value < 0.05);
}

TEST_CASE("degenerate inputs") {
  CHECK(error_code_of([] { dunn_test({{1.0, 1.0}, {1.0, 1.0}}); }) == ErrorCode::kUndefinedStatistic);
  CHECK(error_code_of([] { kruskal_wallis({{1.0, 1.0}, {1.0, 1.0}}); }) == ErrorCode::kDegenerateInput);
  CHECK(error_code_of([] { kruskal_wallis({{1.0, 2.0}}); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("Kolmogorov survival function") {
  // Reference values of P(K > x) from scipy.special.kolmogorov.
  CHECK(kolmogorov_sf(0.5) == doctest::Approx(0.9639452436648751).epsilon(1e-10));
  CHECK(kolmogorov_sf(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-10));
  CHECK(kolmogorov_sf(1.36) == doctest::Approx(0.049485876755377876).epsilon(1e-10));
  CHECK(kolmogorov_sf(0.0) == 1.0);
  CHECK(kolmogorov_sf(5.0) < 1e-20);
}

TEST_CASE("KS normality") {
  const auto normal = ks_normality(testing::white_noise(500, 3));
  CHECK(normal.params_estimated);
  CHECK(normal.p_value > 0.05);
  Rng rng(4);
  std::vector<double> skewed(500);
  for (double& v : skewed) v = std::exp(2.0 * rng.normal());
  CHECK(ks_normality(skewed).p_value < 0.05);
  CHECK(error_code_of([] { ks_normality(std::vector<double>(10, 2.0)); }) == ErrorCode::kDegenerateInput);
  CHECK(error_code_of([] { ks_normality(std::vector<double>{1, 2, 3}); }) == ErrorCode::kInsufficientData);
}

TEST_CASE("feature analysis over pain states") {
  Rng rng(5);
  Dataset ds;
  const std::array<int, 4> scores{0, 2, 5, 8};
  for (std::size_t s = 0; s < 4; ++s) {
    for (int i = 0; i < 30; ++i) {
      LabeledWindow w;
      w.subject_id = "S1";
      w.pain_score = scores[s];
      w.pain_state = bin_pain(scores[s]);
      for (double& v : w.features) v = rng.normal();
      w.features[feature_index("rr_mean_ms")] = 800.0 - 60.0 * static_cast<double>(s) + 10.0 * rng.normal();
      w.features[feature_index("rmssd_ms")] = 3.0;
      ds.rows.push_back(w);
    }
  }
  const auto a = feature_pain_analysis(ds, "rr_mean_ms");
  CHECK(a.states.size() == 4);
  CHECK(a.pairs.size() == 6);
  CHECK(a.kruskal.has_value());
  for (const auto& p : a.pairs) CHECK(p.dunn.p_value < 0.05);

  const auto flat = feature_pain_analysis(ds, "rmssd_ms");
  CHECK(flat.degenerate);
  for (const auto& p : flat.pairs) CHECK(p.dunn.p_value == 1.0);

  const std::vector<FeaturePainAnalysis> both{a, flat};
  const auto csv = dunn_csv(both);
  CHECK(csv.rfind("feature,pair,z,p,p_adj,significant\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
}
