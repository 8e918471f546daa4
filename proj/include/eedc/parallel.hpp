#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace eedc {

/// Worker count used by the library. Zero means hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Splits [0, count) into contiguous chunks, one per worker, and calls
/// body(chunk_index, begin, end) for each. Returns the chunk count so
/// callers can fold per-chunk results in chunk order, which keeps every
/// reduction independent of scheduling. The first exception thrown by any
/// worker is rethrown on the calling thread.
template <typename Body>
std::size_t parallel_chunks(std::uint64_t count, Body&& body) {
  const std::uint64_t workers =
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(thread_count(), count));
  if (workers <= 1) {
    body(std::size_t{0}, std::uint64_t{0}, count);
    return 1;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = count * w / workers;
    const std::uint64_t end = count * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        body(static_cast<std::size_t>(w), begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return static_cast<std::size_t>(workers);
}

}  // namespace eedc
