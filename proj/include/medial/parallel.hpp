#pragma once

#include <cstddef>
#include <functional>

namespace medial {

/// Caps the number of worker threads used by parallel loops (0 restores the
/// hardware default).
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs fn(i) for i in [0, n) over contiguous chunks. Iterations must write
/// to disjoint data; the result is then independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace medial
