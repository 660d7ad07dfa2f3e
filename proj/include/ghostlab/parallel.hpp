#pragma once

#include <cstddef>
#include <functional>

namespace ghostlab {

/// Worker cap from GHOSTLAB_THREADS, else the hardware concurrency (>= 1).
unsigned default_threads();

/// Calls body(i) for every i in [0, count) on up to `threads` workers.
/// Each index is processed exactly once; callers write results by index so
/// the outcome does not depend on scheduling. The first exception thrown by
/// any body is rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

} // namespace ghostlab
