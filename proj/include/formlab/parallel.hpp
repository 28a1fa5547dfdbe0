#pragma once

#include <cstddef>
#include <functional>

namespace formlab {

/// Worker count for sweeps: FORMLAB_THREADS if set and positive, otherwise
/// the hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Overrides the worker count for the rest of the process (0 restores the
/// default).
void set_thread_count(std::size_t threads);

/// Runs body(i) for i in [0, count) on up to thread_count() workers. Each
/// index is visited exactly once; callers write into per-index slots and
/// reduce afterwards in index order, which keeps results independent of the
/// pool size.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace formlab
