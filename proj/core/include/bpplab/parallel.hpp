#pragma once

#include <cstddef>
#include <functional>

namespace bpplab {

// Worker count for sample loops: hardware concurrency, capped by the
// BPP_LAB_THREADS environment variable when it is set to a positive integer.
std::size_t thread_budget();

// Calls body(i) for every i in [0, count). Indices are split into contiguous
// blocks, one per worker; callers write per-index results and reduce
// afterwards so that outcomes never depend on the worker count.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& body);

}  // namespace bpplab
