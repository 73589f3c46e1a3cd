#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace notemine {

// Worker cap: NOTEMINE_THREADS if set, else hardware concurrency.
inline unsigned thread_count(std::size_t work_items = SIZE_MAX) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("NOTEMINE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = static_cast<unsigned>(v);
  }
  if (work_items < n) n = static_cast<unsigned>(std::max<std::size_t>(work_items, 1));
  return n;
}

// Runs fn(begin, end, worker_index) over contiguous chunks of [0, n).
// Deterministic partition: chunk boundaries depend only on n and workers.
inline void parallel_chunks(
    std::size_t n, unsigned workers,
    const std::function<void(std::size_t, std::size_t, unsigned)>& fn) {
  if (n == 0) return;
  if (workers <= 1) {
    fn(0, n, 0);
    return;
  }
  if (workers > n) workers = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t base = n / workers, extra = n % workers, begin = 0;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t len = base + (w < extra ? 1 : 0);
    pool.emplace_back(fn, begin, begin + len, w);
    begin += len;
  }
  for (auto& t : pool) t.join();
}

}  // namespace notemine
