#pragma once

#include <cstddef>
#include <functional>

namespace minsight {

// Worker cap: hardware concurrency, clamped by the MINSIGHT_THREADS
// environment variable when set.
int thread_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous index blocks,
// one per worker, so callers that reduce per-worker results in worker order
// get deterministic sums. fn must only write to disjoint slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int max_threads = 0);

}  // namespace minsight
