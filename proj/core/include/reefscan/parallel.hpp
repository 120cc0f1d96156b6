#pragma once

#include <cstddef>
#include <functional>

namespace reefscan {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must
// be independent; callers merge results by index so the outcome does not
// depend on the thread count. Exceptions from workers are rethrown.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

// Thread count resolution: explicit request > REEFSCAN_THREADS env var >
// hardware concurrency.
int resolve_threads(int requested);

}  // namespace reefscan
