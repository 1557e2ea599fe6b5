#include "skewfatou/parallel.hpp"

#include <atomic>
#include <thread>

namespace skewfatou {

unsigned default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1u : n;
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (threads == 0) threads = default_threads();
  if (threads <= 1 || n == 1) {
    fn(0, n);
    return;
  }
  // Fixed chunk grid; workers pull chunk indices from a shared counter.
  std::size_t nchunks = n < threads * 4 ? n : threads * 4;
  std::size_t per = (n + nchunks - 1) / nchunks;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= nchunks) return;
      std::size_t lo = c * per, hi = lo + per < n ? lo + per : n;
      if (lo < hi) fn(lo, hi);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

} // namespace skewfatou
