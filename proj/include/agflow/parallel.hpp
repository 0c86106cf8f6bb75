#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace agflow {

/// Evaluate fn(i) for i in [0, count) on up to `workers` threads.
/// fn must write its result into storage indexed by i; since every sample is a
/// pure function of its index, the outcome cannot depend on scheduling.
template <class Fn>
void parallel_samples(std::int64_t count, int workers, Fn&& fn) {
  if (count <= 0) return;
  if (workers < 1) workers = 1;
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw > 0 && workers > hw) workers = hw;
  if (workers == 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }

  constexpr std::int64_t kChunk = 16;
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto body = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::int64_t begin = next.fetch_add(kChunk, std::memory_order_relaxed);
      if (begin >= count) break;
      const std::int64_t end = std::min(begin + kChunk, count);
      try {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace agflow
