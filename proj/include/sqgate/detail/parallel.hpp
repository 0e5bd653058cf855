#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace sqgate::detail {

// Runs f(0..n-1) on up to `threads` workers. Work items must be independent
// and must not throw; results are written to index-addressed slots so the
// output is identical for any worker count.
template <typename F>
void parallel_indexed(int n, int threads, F&& f) {
  if (threads < 1) threads = 1;
  if (threads > n) threads = n;
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) break;
        f(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

inline int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace sqgate::detail
