#pragma once

#include <cstddef>
#include <functional>

namespace guas {

/// Worker count: GUAS_CERT_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// is visited exactly once; callers write results into per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace guas
