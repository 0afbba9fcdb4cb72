#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace weaklp {

/// Worker count used when an operation is not given one explicitly.
/// Reads WEAKLP_WORKERS once; falls back to 1.
int default_workers();
void set_default_workers(int workers);

/// Runs fn(i) for i in [0, n). Each worker owns one contiguous index range.
/// Callers write results into per-index slots and reduce in index order, so
/// the outcome never depends on the worker count.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 0) workers = default_workers();
  std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    std::size_t begin = n * t / w;
    std::size_t end = n * (t + 1) / w;
    threads.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

/// Deterministic parallel sum: per-index terms reduced in index order.
template <class Fn>
double parallel_sum(std::size_t n, int workers, Fn&& term) {
  std::vector<double> parts(n, 0.0);
  parallel_for(n, workers, [&](std::size_t i) { parts[i] = term(i); });
  double s = 0.0;
  for (double v : parts) s += v;
  return s;
}

}  // namespace weaklp
