#include "learn/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace painbvp::learn::detail {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& objective, std::vector<double> x0, std::size_t max_iter, double tol,
                           std::size_t memory) {
  const std::size_t n = x0.size();
  LbfgsResult res;
  res.x = std::move(x0);
  std::vector<double> g(n), g_new(n), d(n), x_new(n), alpha(memory);
  res.f = objective(res.x, g);
  std::deque<Pair> pairs;

  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    if (max_abs(g) < tol) {
      res.converged = true;
      return res;
    }
    // Two-loop recursion.
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    for (std::size_t j = pairs.size(); j-- > 0;) {
      alpha[j] = pairs[j].rho * dot(pairs[j].s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[j] * pairs[j].y[i];
    }
    double step = 1.0;
    if (!pairs.empty()) {
      const Pair& last = pairs.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& v : d) v *= gamma;
    } else {
      step = std::min(1.0, 1.0 / std::max(max_abs(g), 1e-300));
    }
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      const double beta = pairs[j].rho * dot(pairs[j].y, d);
      for (std::size_t i = 0; i < n; ++i) d[i] += pairs[j].s[i] * (alpha[j] - beta);
    }
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      pairs.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = dot(g, d);
      step = std::min(1.0, 1.0 / std::max(max_abs(g), 1e-300));
    }

    double f_new = 0.0;
    bool accepted = false;
    for (int attempt = 0; attempt < 80; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + step * d[i];
      f_new = objective(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (pairs.empty()) break;
      pairs.clear();
      continue;
    }

    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_new[i] - res.x[i];
      p.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-300) {
      p.rho = 1.0 / sy;
      pairs.push_back(std::move(p));
      if (pairs.size() > memory) pairs.pop_front();
    }
    res.x.swap(x_new);
    g.swap(g_new);
    res.f = f_new;
  }
  res.converged = max_abs(g) < tol;
  return res;
}

}  // namespace painbvp::learn::detail
