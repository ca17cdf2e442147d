#include "linf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace linf {

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int count) { g_threads = std::max(1, count); }
int threads() { return g_threads; }

void parallel_for(std::int64_t count,
                  const std::function<void(std::int64_t, std::int64_t)>& body) {
  const int t = static_cast<int>(std::min<std::int64_t>(g_threads, std::max<std::int64_t>(count, 1)));
  if (t <= 1 || count < 4096) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex mu;
  const std::int64_t chunk = (count + t - 1) / t;
  for (int w = 0; w < t; ++w) {
    const std::int64_t b = w * chunk;
    const std::int64_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      try {
        body(b, e);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace linf
