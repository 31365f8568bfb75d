#pragma once

#include <cstddef>
#include <functional>

namespace ssflab {

/// Worker count used by parallel_for when none is given. Defaults to 1.
int thread_count();
void set_thread_count(int n);

/// Calls body(i) for i in [0, n). Each index runs exactly once; results must be
/// written to per-index slots so the outcome does not depend on scheduling.
/// The first exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace ssflab
