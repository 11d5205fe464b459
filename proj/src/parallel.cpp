#include "merw/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace merw {

int worker_threads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("MERW_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, cap);
    } catch (const std::exception&) {
      // unparsable value: ignore the cap
    }
  }
  return n;
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t grain) {
  if (n == 0) return;
  grain = std::max<std::size_t>(grain, 1);
  const std::size_t max_chunks = (n + grain - 1) / grain;
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(worker_threads()), max_chunks);
  if (threads <= 1) {
    body(0, n);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(0, std::min(n, chunk));
  for (auto& th : pool) th.join();
}

namespace {

constexpr std::size_t kLeaf = 64;

double sum_range(const double* x, std::size_t n) {
  if (n <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return sum_range(x, half) + sum_range(x + half, n - half);
}

double dot_range(const double* x, const double* y, std::size_t n) {
  if (n <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
  }
  const std::size_t half = n / 2;
  return dot_range(x, y, half) + dot_range(x + half, y + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> x) { return sum_range(x.data(), x.size()); }

double pairwise_dot(std::span<const double> x, std::span<const double> y) {
  return dot_range(x.data(), y.data(), std::min(x.size(), y.size()));
}

double norm2(std::span<const double> x) { return std::sqrt(pairwise_dot(x, x)); }

}  // namespace merw
