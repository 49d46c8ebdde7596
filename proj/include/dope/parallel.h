#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dope {

// worker count for parallel loops; 0 restores the default (logical cores)
void set_jobs(unsigned n);
unsigned jobs();

// Runs f(0..n-1) on up to jobs() threads. The first exception thrown by
// any call is rethrown after all workers stop.
template <class F>
void parallel_for(size_t n, F && f)
{
  unsigned w = std::min<size_t>(jobs(), n);
  if (w <= 1) {
    for (size_t k = 0; k < n; ++k) f(k);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex mu;
  auto run = [&] {
    for (size_t k; !failed && (k = next++) < n;) {
      try {
        f(k);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!err) err = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < w; ++t) pool.emplace_back(run);
  run();
  for (auto & t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace dope
