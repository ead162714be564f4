#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mdk {

/// 0 means one worker per hardware thread.
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(worker, begin, end) over the contiguous chunks `bounds[w]..bounds[w+1]`.
/// Worker 0 runs on the calling thread. The first exception is rethrown.
template <typename Body>
void parallel_chunks(const std::vector<std::size_t>& bounds, Body&& body) {
  const std::size_t workers = bounds.size() - 1;
  if (workers == 1) {
    body(std::size_t{0}, bounds[0], bounds[1]);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        body(w, bounds[w], bounds[w + 1]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  try {
    body(std::size_t{0}, bounds[0], bounds[1]);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Equal-size chunk bounds for n items over `workers` workers.
inline std::vector<std::size_t> even_chunks(std::size_t n, unsigned workers) {
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(workers, n == 0 ? 1 : n));
  std::vector<std::size_t> bounds(w + 1);
  for (std::size_t k = 0; k <= w; ++k) bounds[k] = n * k / w;
  return bounds;
}

}  // namespace mdk
