#pragma once

#include <cstddef>
#include <functional>

namespace lsa {

/// Worker count: LSA_THREADS when set (>= 1), else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lsa
