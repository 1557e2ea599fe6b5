#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace skewfatou {

// Worker count used when a caller passes threads == 0.
unsigned default_threads();

// Runs fn(begin, end) over [0, n) split into chunks. Chunking depends only on
// n (never on the thread count), so any reduction done per chunk and combined
// in chunk order is bit-reproducible across --threads settings.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

// Map-reduce with deterministic combine order: partials[i] covers chunk i and
// the combine runs sequentially over ascending i.
template <typename T>
T parallel_reduce(std::size_t n, unsigned threads, T init,
                  const std::function<T(std::size_t, std::size_t)>& map_chunk,
                  const std::function<T(T, T)>& combine) {
  if (n == 0) return init;
  std::size_t nchunks = n < 2048 ? 1 : (n + 2047) / 2048;
  if (nchunks > 512) nchunks = 512;
  std::vector<T> partials(nchunks, init);
  std::size_t per = (n + nchunks - 1) / nchunks;
  parallel_for(nchunks, threads, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      std::size_t lo = c * per, hi = lo + per < n ? lo + per : n;
      if (lo < hi) partials[c] = map_chunk(lo, hi);
    }
  });
  T acc = init;
  for (std::size_t c = 0; c < nchunks; ++c) acc = combine(acc, partials[c]);
  return acc;
}

} // namespace skewfatou
