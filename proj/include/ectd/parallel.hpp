#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ectd {

inline unsigned default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

// Splits [0, n) into `chunks` contiguous ranges and runs fn(chunk, begin, end)
// on up to `workers` threads. The chunk layout depends only on (n, chunks), so
// callers that merge per-chunk results in chunk order are deterministic for a
// fixed chunk count regardless of the worker count.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t chunks, unsigned workers, Fn&& fn) {
  chunks = std::max<std::size_t>(1, std::min(chunks, std::max<std::size_t>(n, 1)));
  auto bounds = [&](std::size_t c) { return n * c / chunks; };
  if (workers <= 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c, bounds(c), bounds(c + 1));
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> pool;
  const unsigned threads = unsigned(std::min<std::size_t>(workers, chunks));
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t c = t; c < chunks; c += threads) {
        try {
          fn(c, bounds(c), bounds(c + 1));
        } catch (...) {
          errors[c] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Runs fn(i) for every i in [0, n); results must be written to slot i.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t chunks = workers <= 1 ? 1 : std::size_t(workers) * 8;
  parallel_chunks(n, chunks, workers, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace ectd
