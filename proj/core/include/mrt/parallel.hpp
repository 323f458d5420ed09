#pragma once

#include <cstddef>
#include <functional>

namespace mrt {

/// Chunked parallel loop over [0, n).  Each index writes only its own slot,
/// so results are deterministic regardless of the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace mrt
