#pragma once

#include <cstddef>
#include <functional>

namespace cq {

/// Worker count: the THREADS environment variable when set to a positive
/// integer, otherwise the hardware concurrency.
unsigned worker_count();

/// Runs fn(0) .. fn(n-1) across up to `threads` workers. Callers index into
/// pre-sized output slots, so the result is identical to the serial order.
/// The first exception raised by any task is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace cq
