#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace specrule {

/// Worker budget: SPECRULE_THREADS when set (clamped to [1,256]), otherwise
/// min(4, hardware threads).
inline int worker_count() {
  if (const char* env = std::getenv("SPECRULE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 256)
      throw std::invalid_argument(
          "SPECRULE_THREADS must be an integer in [1,256], got '" +
          std::string(env) + "'");
    return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  if (hw < 1) hw = 1;
  return static_cast<int>(hw < 4 ? hw : 4);
}

/// Run f(0..n-1) across the worker budget. Results must not depend on the
/// execution order; the first exception thrown is rethrown after the join.
template <class F>
void parallel_for(int n, F&& f) {
  if (n <= 0) return;
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace specrule
