#pragma once

#include <cstddef>
#include <functional>

namespace cuphaptics {

/// Worker count: CUPHAPTICS_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (0 or unset means auto).
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. fn must only
/// write state owned by index i. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cuphaptics
