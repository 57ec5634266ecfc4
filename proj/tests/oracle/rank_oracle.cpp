#include <cmath>
#include <map>
#include <numbers>

#include "oracles.hpp"

namespace oracle {

double mann_whitney_u(const std::vector<double>& scores, const std::vector<int>& labels) {
  double u = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == 1) continue;
      if (scores[i] > scores[j]) u += 1.0;
      if (scores[i] == scores[j]) u += 0.5;
    }
  }
  return u;
}

namespace {

struct Pooled {
  std::vector<double> values;
  std::vector<std::size_t> group;
};

Pooled pool(const std::vector<std::vector<double>>& groups) {
  Pooled p;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (double v : groups[g]) {
      p.values.push_back(v);
      p.group.push_back(g);
    }
  }
  return p;
}

double rank_of(const std::vector<double>& all, double v) {
  double smaller = 0, equal = 0;
  for (double w : all) {
    smaller += w < v;
    equal += w == v;
  }
  return 1.0 + smaller + (equal - 1.0) / 2.0;
}

std::vector<double> group_mean_ranks(const Pooled& p, std::size_t k) {
  std::vector<double> sum(k, 0.0), count(k, 0.0);
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    sum[p.group[i]] += rank_of(p.values, p.values[i]);
    count[p.group[i]] += 1.0;
  }
  for (std::size_t g = 0; g < k; ++g) sum[g] /= count[g];
  return sum;
}

double tie_sum(const std::vector<double>& values) {
  std::map<double, double> counts;
  for (double v : values) counts[v] += 1.0;
  double t = 0.0;
  for (const auto& [v, c] : counts) t += c * c * c - c;
  return t;
}

}  // namespace

std::vector<DunnPair> dunn_z(const std::vector<std::vector<double>>& groups) {
  const Pooled p = pool(groups);
  const double n = static_cast<double>(p.values.size());
  const auto r = group_mean_ranks(p, groups.size());
  const double ties = tie_sum(p.values) / (12.0 * (n - 1.0));
  std::vector<DunnPair> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const double se = std::sqrt((n * (n + 1.0) / 12.0 - ties) *
                                  (1.0 / static_cast<double>(groups[i].size()) + 1.0 / static_cast<double>(groups[j].size())));
      out.push_back({(r[i] - r[j]) / se, r[i], r[j]});
    }
  }
  return out;
}

double kruskal_h(const std::vector<std::vector<double>>& groups) {
  const Pooled p = pool(groups);
  const double n = static_cast<double>(p.values.size());
  const auto r = group_mean_ranks(p, groups.size());
  double h = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double ng = static_cast<double>(groups[g].size());
    h += ng * (r[g] - (n + 1.0) / 2.0) * (r[g] - (n + 1.0) / 2.0);
  }
  h *= 12.0 / (n * (n + 1.0));
  return h / (1.0 - tie_sum(p.values) / (n * n * n - n));
}

double butterworth_power_gain(double f, double fc, double fs, int order) {
  const double ratio = std::tan(std::numbers::pi * f / fs) / std::tan(std::numbers::pi * fc / fs);
  return 1.0 / (1.0 + std::pow(ratio, 2.0 * order));
}

}  // namespace oracle
