#pragma once
#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace riemalpha {

// Worker cap: RIEM_ALPHA_THREADS when set and positive, hardware
// concurrency otherwise, never less than 1.
inline int worker_count() {
  if (const char* env = std::getenv("RIEM_ALPHA_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n) across workers. Results must be written to
// per-index slots; the work split never affects values, only timing.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(worker_count(), std::max(n, 1));
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace riemalpha
