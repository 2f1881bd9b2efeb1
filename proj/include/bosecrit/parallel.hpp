#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace bosecrit {

// Thread count: explicit request if > 0, else BOSECRIT_THREADS, else hardware concurrency.
int resolve_threads(int requested);

// Splits [0, n) into contiguous chunks and runs body(begin, end) on up to `threads` workers.
// Callers write results into per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body);

// Independent random stream for work item `index` under master seed `seed`.
std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t index);

}  // namespace bosecrit
