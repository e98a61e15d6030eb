#pragma once

#include <cstddef>
#include <functional>

namespace dime {

// Run fn(i) for every i in [0, count). Tasks are independent; each writes
// only to its own output slot, so the result is bit-identical to a
// sequential loop no matter the thread count. With one worker (or one CPU)
// this degenerates to a plain loop with zero threading overhead.
//
// Exceptions: if any task throws, the exception from the lowest failing
// index is rethrown after all workers finish (deterministic error too).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// Number of workers parallel_for will use (hardware concurrency, min 1).
unsigned worker_count();

}  // namespace dime
