#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "painbvp/error.hpp"
#include "painbvp/rng.hpp"

namespace testing {

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
  painbvp::Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  return x;
}

inline std::vector<double> sine(std::size_t n, double period, double amplitude = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period + phase);
  }
  return x;
}

// AR(1) series with a random coefficient in [0, 0.95).
inline std::vector<double> ar1(std::size_t n, painbvp::Rng& rng) {
  const double phi = rng.uniform(0.0, 0.95);
  std::vector<double> x(n);
  double prev = 0.0;
  for (double& v : x) v = prev = phi * prev + rng.normal();
  return x;
}

template <typename Fn>
painbvp::ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const painbvp::Error& e) {
    return e.code();
  }
  throw std::logic_error("expected a painbvp::Error");
}

}  // namespace testing
