#pragma once

#include <cstddef>
#include <functional>

namespace torusma {

// Worker count: TORUS_MA_THREADS if set and positive, else hardware concurrency.
int worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Results must
// be written to slot i by the caller, so output order never depends on scheduling.
// The first exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace torusma
