#pragma once

#include <cstddef>
#include <functional>

namespace casg::harness {

/// Logical cores, at least 1.
int default_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// processed exactly once; results must be written to per-index slots so the
/// outcome does not depend on scheduling. The exception thrown for the lowest
/// index, if any, is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace casg::harness
