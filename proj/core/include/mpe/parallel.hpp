#pragma once

#include <cstdint>
#include <functional>

namespace mpe {

// Worker count: explicit request wins, then the MPE_LAB_WORKERS environment
// variable, then hardware concurrency.
int resolve_workers(int requested = 0);

// Runs fn(0..count-1) on up to `workers` threads. Work items must write only
// to their own output slots; the first exception thrown by any item is
// rethrown on the calling thread after all workers join.
void parallel_for(std::int64_t count, int workers,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace mpe
