#pragma once

#include <functional>

namespace mondi {

// Worker count used by row-parallel loops. Defaults to the value of the
// MONDI_THREADS environment variable, else the hardware concurrency.
int thread_count();

// Overrides the worker count for the current process; n <= 0 restores the
// environment default.
void set_thread_count(int n);

// Calls body(row) for every row in [0, rows). Rows are split into contiguous
// blocks, one per worker. Callers that reduce must write per-row partials and
// combine them in row order so results do not depend on the worker count.
void parallel_rows(int rows, const std::function<void(int)>& body);

}  // namespace mondi
