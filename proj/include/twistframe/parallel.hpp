#pragma once

#include <functional>

namespace twistframe {

/// Number of worker threads from TWISTFRAME_THREADS, default 1.
int default_thread_count();

/// Runs fn(row) for rows 0..n-1 across the given number of threads. Rows
/// write disjoint output slots, so scheduling does not affect results.
void parallel_rows(int n, int threads, const std::function<void(int)>& fn);

}  // namespace twistframe
