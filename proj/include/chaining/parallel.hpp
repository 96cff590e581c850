#pragma once

#include <cstddef>
#include <functional>

namespace chaining {

/// Worker threads to use: hardware concurrency, capped by CHAINING_THREADS when set.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) across worker_count() threads. Every index runs
/// exactly once; the first exception thrown by any task is rethrown here.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace chaining
