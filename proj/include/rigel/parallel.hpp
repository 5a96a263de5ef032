// Fixed-size worker fan-out. Each call spawns `workers` threads (the caller
// runs worker 0) and joins them before returning.
#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rigel {

/// Runs fn(worker_index) for worker_index in [0, workers) concurrently and
/// rethrows the first exception raised by any worker.
template <typename Fn>
void run_workers(unsigned workers, Fn&& fn) {
  if (workers <= 1) {
    fn(0u);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  auto guarded = [&](unsigned w) {
    try {
      fn(w);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) threads.emplace_back(guarded, w);
    guarded(0);
  }
  if (error) std::rethrow_exception(error);
}

/// Round-robin partition: worker w gets items w, w + W, w + 2W, ...
template <typename Fn>
void parallel_round_robin(std::size_t count, unsigned workers, Fn&& fn) {
  run_workers(workers, [&](unsigned w) {
    for (std::size_t i = w; i < count; i += workers) fn(i);
  });
}

}  // namespace rigel
