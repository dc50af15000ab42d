#pragma once

#include <functional>
#include <vector>

namespace genaug::util {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is an
// independent unit of work; results must be written to pre-assigned slots so
// the outcome is identical for any thread count.
void parallel_for(int64_t count, int threads, const std::function<void(int64_t)>& fn);

int default_threads();

}  // namespace genaug::util
