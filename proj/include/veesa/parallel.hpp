#pragma once

#include <cstddef>
#include <functional>

namespace veesa {

/// Worker count used by parallel stages. Defaults to VEESA_THREADS when set,
/// otherwise the hardware concurrency.
int num_threads();
void set_num_threads(int n);

/// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
/// write results to disjoint slots so output does not depend on thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace veesa
