#pragma once

#include <cstddef>
#include <functional>

namespace impulseflow {

/// Runs fn(i) for i in [0, n) on `workers` threads (0 or 1 runs inline).
/// Each index runs exactly once; if any call throws, the exception of the
/// lowest failing index is rethrown after all threads join.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace impulseflow
