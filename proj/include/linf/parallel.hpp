#pragma once

// Minimal data-parallel loop over node ranges.

#include <cstdint>
#include <functional>

namespace linf {

/// Number of worker threads used by node-wise loops (default 1).
void set_threads(int count);
int threads();

/// Calls body(begin, end) on disjoint chunks covering [0, count).
void parallel_for(std::int64_t count,
                  const std::function<void(std::int64_t, std::int64_t)>& body);

}  // namespace linf
