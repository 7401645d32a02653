#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace funoclust::detail {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n). Work is split into contiguous blocks, one per
/// thread; callers that need determinism must write results by index only.
/// The first exception thrown by any worker is rethrown on the calling thread.
inline void parallel_for(int n, const std::function<void(int)>& fn, int n_threads = 0) {
  if (n <= 0) return;
  int threads = std::min(resolve_threads(n_threads), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&](int lo, int hi) {
    try {
      for (int i = lo; i < hi; ++i) fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  int base = n / threads, extra = n % threads, start = 0;
  for (int t = 0; t < threads; ++t) {
    int len = base + (t < extra ? 1 : 0);
    pool.emplace_back(worker, start, start + len);
    start += len;
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace funoclust::detail
