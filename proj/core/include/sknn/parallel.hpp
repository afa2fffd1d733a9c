#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace sknn {

// Process-wide worker count; 0 means hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Splits [0, n) into contiguous chunks, one worker per chunk. Results must
// be written to index-addressed storage so reductions stay deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sknn
