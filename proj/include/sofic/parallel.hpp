#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sofic {

/// Process-wide worker count used by parallel_for; defaults to 1.
void set_worker_threads(int threads);
int worker_threads();

/// Runs body(i) for i in [0, n) on worker_threads() threads. Work items are
/// handed out dynamically, so body must write only to slot i of its output.
/// The exception of the lowest failing index is rethrown.
template <class Body> void parallel_for(std::size_t n, Body &&body) {
  const auto threads = static_cast<std::size_t>(worker_threads());
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= n)
        return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  const auto count = threads < n ? threads : n;
  pool.reserve(count);
  for (std::size_t t = 0; t < count; ++t)
    pool.emplace_back(worker);
  for (auto &t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
}

} // namespace sofic
