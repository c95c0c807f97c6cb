#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace horizon_limit {

/// Worker cap from HORIZON_LIMIT_THREADS (0 or 1 = sequential); unset
/// means hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("HORIZON_LIMIT_THREADS")) {
    try {
      const long v = std::stol(env);
      return v <= 0 ? 1u : static_cast<unsigned>(v);
    } catch (const std::exception&) {
      return 1u;
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n). Results must be written by index, so the
/// outcome does not depend on scheduling. The first exception by index
/// is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = worker_count()) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) guarded(i);
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace horizon_limit
