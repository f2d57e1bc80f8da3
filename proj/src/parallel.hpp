#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace secoda {

// Runs fn(begin, end) over disjoint contiguous chunks of [0, n). Chunk
// boundaries depend only on n and threads, so any computation whose
// chunks write disjoint output is reproducible for every thread count.
template <typename Fn>
void parallel_chunks(size_t n, int threads, Fn&& fn) {
  if (threads < 1) threads = 1;
  size_t workers = std::min<size_t>(static_cast<size_t>(threads), n);
  if (workers <= 1 || n == 0) {
    if (n > 0) fn(size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  size_t chunk = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    size_t begin = w * chunk;
    size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace secoda
