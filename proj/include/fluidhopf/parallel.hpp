#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fluidhopf {

/// Worker count: FLUIDHOPF_THREADS when set to a positive integer, else the hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("FLUIDHOPF_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i) for i in [0, n) on up to `threads` workers using contiguous blocks.
/// The first exception thrown by any worker is rethrown on the caller.
inline void parallel_for(long n, const std::function<void(long)>& body, int threads = thread_count()) {
  threads = static_cast<int>(std::clamp<long>(threads, 1, std::max<long>(n, 1)));
  if (threads == 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const long lo = n * t / threads;
    const long hi = n * (t + 1) / threads;
    pool.emplace_back([&, lo, hi] {
      try {
        for (long i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fluidhopf
