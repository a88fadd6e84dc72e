#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace lcp::detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i, acc) for every i in [0, n), task i on worker i % threads, each
/// worker owning one accumulator. Returns the accumulators in worker order;
/// callers merge them with an order-independent reduction.
template <typename Acc, typename Body>
std::vector<Acc> parallel_accumulate(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), n));
  std::vector<Acc> accs(workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i, accs[0]);
    return accs;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) body(i, accs[w]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return accs;
}

}  // namespace lcp::detail
