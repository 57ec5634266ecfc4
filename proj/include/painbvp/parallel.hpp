#pragma once

#include <cstddef>
#include <functional>

namespace painbvp {

/// Worker count used by parallel_for; 0 selects hardware concurrency.
void set_num_threads(std::size_t n);
std::size_t num_threads();

/// Runs fn(i) for i in [0, n) on a bounded pool. Callers write results by
/// index, so output never depends on scheduling. Nested calls run inline.
/// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace painbvp
