#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace critgraph {

/// Worker count: CRITGRAPH_THREADS if set (>=1), else all hardware threads.
inline int default_thread_count() {
  if (const char* env = std::getenv("CRITGRAPH_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Run fn(i) for i in [0, count). Work items must be independent; callers
/// get determinism by writing results into slot i. threads <= 0 means
/// default_thread_count().
template <class F>
void parallel_for(int count, int threads, F&& fn) {
  if (threads <= 0) threads = default_thread_count();
  if (count <= 0) return;
  if (threads == 1 || count == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  if (threads > count) threads = count;
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace critgraph
