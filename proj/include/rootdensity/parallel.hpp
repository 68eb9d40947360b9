#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rootdensity {

/// Number of workers to use when the caller asks for 0 ("all").
inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, count) into `workers` contiguous chunks and runs
/// fn(begin, end, worker_index) on each. Chunk boundaries depend only on
/// count and workers. The first exception thrown by any worker is rethrown
/// after all workers join.
template <typename Fn>
void parallel_chunks(std::size_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    fn(std::size_t{0}, count, 0u);
    return;
  }
  const std::size_t used = std::min<std::size_t>(workers, count);
  std::vector<std::exception_ptr> errors(used);
  std::vector<std::jthread> threads;
  threads.reserve(used);
  for (std::size_t w = 0; w < used; ++w) {
    const std::size_t begin = count * w / used;
    const std::size_t end = count * (w + 1) / used;
    threads.emplace_back([&, begin, end, w] {
      try {
        fn(begin, end, static_cast<unsigned>(w));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  threads.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace rootdensity
