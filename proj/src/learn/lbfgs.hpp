#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace painbvp::learn::detail {

/// Objective returning f(x) and writing the gradient.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Limited-memory BFGS with Armijo backtracking. Converged when the
/// gradient's max-norm falls below `tol`.
LbfgsResult minimize_lbfgs(const Objective& objective, std::vector<double> x0, std::size_t max_iter, double tol,
                           std::size_t memory = 10);

}  // namespace painbvp::learn::detail
