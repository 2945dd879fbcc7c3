#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace eit {

/// Global worker cap honored by every parallel map (CLI --threads).
void set_max_threads(int n);
int max_threads();

/// Runs fn(i) for i in [0, count) on up to max_threads() workers.  Indices are
/// split into contiguous chunks so results written to disjoint slots land
/// identically for a fixed thread cap.  First exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace eit
