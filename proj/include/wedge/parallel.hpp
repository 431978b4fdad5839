#pragma once

#include <cstddef>
#include <functional>

namespace wedge {

/// Worker count from WEDGE_THREADS, else the hardware concurrency; at least 1.
std::size_t worker_count();

/// Runs task(i) for i in [0, n) on a bounded pool. Tasks must write only to
/// their own slot; the first exception thrown by any task is rethrown after
/// all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task,
                  std::size_t workers = 0);

}  // namespace wedge
