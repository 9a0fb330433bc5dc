#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace capsqz {

// Worker cap: CAPSQZ_THREADS if set, else hardware concurrency, at least 1.
inline size_t thread_cap() {
  if (const char* env = std::getenv("CAPSQZ_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<size_t>(v);
    return 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Static partition of [begin,end) over worker threads. Results must be written
// to disjoint slots: every call site here is deterministic regardless of the
// number of workers.
inline void parallel_for(size_t begin, size_t end, const std::function<void(size_t)>& body) {
  const size_t n = end > begin ? end - begin : 0;
  if (n == 0) return;
  const size_t workers = std::min(thread_cap(), n);
  if (workers <= 1) {
    for (size_t i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const size_t chunk = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    const size_t lo = begin + w * chunk;
    const size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace capsqz
