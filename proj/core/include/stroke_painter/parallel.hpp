#pragma once

#include <cstddef>
#include <functional>

namespace stroke_painter {

/// Worker count: STROKE_PAINTER_THREADS if set (>= 1), else hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is processed
/// exactly once; callers write results to per-index slots to stay deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace stroke_painter
