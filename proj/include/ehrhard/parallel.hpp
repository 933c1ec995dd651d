#pragma once

#include <cstddef>
#include <functional>

namespace ehrhard {

// Resolves a worker count: explicit request, then EHRHARD_LAB_THREADS, then
// the hardware concurrency. Always at least 1.
int resolve_threads(int requested = 0);

void set_default_threads(int n);
int default_threads();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
// depend only on n and the worker count, so reductions done per chunk in
// index order are reproducible.
void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace ehrhard
