#pragma once

#include <cstddef>
#include <functional>

namespace stylesplit {

/// Worker count from STYLESPLIT_WORKERS, else the hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Callers write
/// results by index so output order never depends on scheduling. The
/// exception thrown for the lowest index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int workers = worker_count());

}  // namespace stylesplit
