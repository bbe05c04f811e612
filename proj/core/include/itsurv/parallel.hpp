#pragma once

#include <cstddef>
#include <functional>

namespace itsurv {

// Number of worker threads: explicit request, else the ITSURV_THREADS
// environment variable, else hardware concurrency.
int resolve_thread_count(int requested);

// Runs fn(0..n-1) across workers pulling from a shared counter. Tasks must
// write results into per-index slots; combined with index-ordered
// aggregation this keeps parallel output identical to serial output.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace itsurv
