#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sodeint {

/// Runs fn(j, worker) for j = 0..count-1, sharded over `workers` threads.
/// Each index must write only to its own output slot; under that contract the
/// results are bit-identical for every worker count, so callers may reduce
/// the slots sequentially afterwards.
template <typename Fn>
void parallel_samples(std::int64_t count, int workers, Fn&& fn) {
  if (workers <= 1 || count < 2) {
    for (std::int64_t j = 0; j < count; ++j) fn(j, 0);
    return;
  }
  const std::int64_t chunk = std::max<std::int64_t>(1, count / (8 * workers));
  std::atomic<std::int64_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto body = [&](int worker) {
    try {
      for (;;) {
        const std::int64_t begin = next.fetch_add(chunk);
        if (begin >= count) break;
        const std::int64_t end = std::min(count, begin + chunk);
        for (std::int64_t j = begin; j < end; ++j) fn(j, worker);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sodeint
