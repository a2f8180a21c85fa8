#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace vqa::detail {

// Runs fn(i) for i in [0,n) on up to `workers` threads. Callers must write
// results to per-index slots; no other shared mutation. The strided split is
// static, so which thread runs which index never affects the result.
inline void parallel_for(size_t n, int workers,
                         const std::function<void(size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const size_t nw = std::min(size_t(workers), n);
  std::vector<std::thread> threads;
  threads.reserve(nw);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (size_t t = 0; t < nw; ++t) {
    threads.emplace_back([&, t]() {
      try {
        for (size_t i = t; i < n; i += nw) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace vqa::detail
