#pragma once

#include <cstddef>
#include <functional>

namespace cohevo {

/// Data-parallel width: min(requested, COHEVO_THREADS if set), at least 1.
unsigned parallel_width(unsigned requested);

/// Splits [0, n) into contiguous chunks processed by worker threads.
/// Each index is touched exactly once, so independent per-index writes are
/// bit-reproducible at any width. Runs inline when width <= 1.
void parallel_for(std::size_t n, unsigned width, const std::function<void(std::size_t)>& body);

}  // namespace cohevo
