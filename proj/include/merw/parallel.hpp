#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace merw {

// Number of worker threads: hardware concurrency, capped by MERW_THREADS.
int worker_threads();

// Splits [0, n) into contiguous chunks of at least `grain` items and runs
// body(begin, end) on each. Chunks never overlap, so bodies that write only
// their own range produce identical results for every thread count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t grain = std::size_t{1} << 14);

// Fixed-shape pairwise reductions. The tree depends only on the length, so
// results are bit-reproducible regardless of threading.
double pairwise_sum(std::span<const double> x);
double pairwise_dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

}  // namespace merw
