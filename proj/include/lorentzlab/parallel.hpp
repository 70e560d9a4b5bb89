#pragma once

#include <cstddef>
#include <functional>

namespace lorentzlab {

/// Worker count used by parallel_for. Defaults to $LORENTZLAB_THREADS or 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is written
/// by exactly one worker, so results never depend on the thread count.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lorentzlab
