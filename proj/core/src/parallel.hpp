#pragma once

#include <cstdint>
#include <functional>

namespace psmnet::detail {

// Worker count: min(hardware threads, PSMNET_THREADS when set). At least 1.
int max_threads();

// Runs fn(i) for every i in [0, n). Tasks must write disjoint outputs; each
// element's inner reduction order is fixed, so results are bit-identical for
// any worker count.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

}  // namespace psmnet::detail
