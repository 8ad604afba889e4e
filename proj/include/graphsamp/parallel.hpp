#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace graphsamp {

// Worker count: hardware_concurrency, capped by GRAPHSAMP_THREADS if set.
inline int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("GRAPHSAMP_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) hw = std::min(hw, static_cast<int>(v));
  }
  return hw;
}

// Runs fn(i) for every i in [begin, end). Iterations must be independent and
// write only to disjoint slots, so the result does not depend on the number
// of workers or the interleaving. Exceptions are captured and rethrown on
// the calling thread.
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn) {
  const int count = end - begin;
  if (count <= 0) return;
  const int workers = std::min(thread_budget(), count);
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<int> next{begin};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto body = [&]() {
    for (;;) {
      const int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= end || failed.load(std::memory_order_relaxed)) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace graphsamp
