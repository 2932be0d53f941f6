#pragma once

#include <cstddef>
#include <functional>

namespace wdrc {

/// Worker count used by node sweeps and Monte Carlo loops. 0 means "all cores".
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
/// write into per-index slots so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wdrc
