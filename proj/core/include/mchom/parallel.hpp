#pragma once

#include <functional>

namespace mchom {

// Worker count: an explicit positive request wins, then MCHOM_THREADS, then
// the number of hardware threads.
int resolve_threads(int requested);

// Runs fn(0..n-1) on up to `threads` workers. Each index runs exactly once;
// the first exception thrown by any worker is rethrown after all finish.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

} // namespace mchom
