#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace superpure {

/// Number of threads parallel_for will use for `workers` (<= 0 means
/// hardware concurrency).
inline int worker_count(int workers) {
  if (workers > 0) return workers;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs fn(index, worker) for index in [0, n) on at most `workers` threads.
/// Indices are claimed in order; the first exception is rethrown after all
/// workers have joined. Worker ids are in [0, worker_count(workers)).
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  workers = worker_count(workers);
  const auto count = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(workers)));
  if (count == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i, w);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace superpure
