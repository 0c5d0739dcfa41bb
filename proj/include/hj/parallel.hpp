#pragma once

#include <cstddef>
#include <functional>

namespace hj {

/// Worker count: `requested` when positive, else the HJ_THREADS environment
/// variable, else the hardware concurrency (at least 1).
[[nodiscard]] int resolve_threads(int requested);

/// Calls fn(i) for i in [0, n) on `threads` workers. Indices are handed out
/// dynamically; callers write results to slot i only, so output does not depend
/// on scheduling. The first exception thrown by fn is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace hj
