#pragma once

#include <cstddef>
#include <functional>

namespace wqbm {

/// Worker count: hardware concurrency, capped by WIGNER_QBM_THREADS when set.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Each index
/// is handled by exactly one call, so results written per index do not depend
/// on scheduling. The first exception thrown by any call is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wqbm
