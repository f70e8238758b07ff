#pragma once

#include <cstddef>
#include <functional>

namespace mfbmvol {

/// Hardware concurrency, capped by the MFBMVOL_THREADS environment variable.
unsigned default_worker_count();

/// Run body(i) for i in [0, count) on up to `workers` threads (0 means
/// default_worker_count()). Iterations must be independent; the first
/// exception thrown by any iteration is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace mfbmvol
