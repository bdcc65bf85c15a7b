#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

namespace zyg {

using Rng = std::mt19937_64;

// Pairwise (tree) summation; error grows like O(log n) instead of O(n).
double pairwise_sum(std::span<const double> v);

// Sum of a[i]*b[i] accumulated pairwise.
double pairwise_dot(std::span<const double> a, std::span<const double> b);

struct LinearFit {
  std::vector<double> x;
  std::vector<double> y;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of fitted residuals
};

// Ordinary least squares of y against x after discarding the `drop`
// points with the smallest x.
LinearFit ols_fit(std::vector<double> x, std::vector<double> y, int drop = 0);

// Fit of log2(y) against log2(x), dropping the `drop` smallest scales.
LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y,
                     int drop = 2);

// 2^e for integer e, exact.
double exp2i(int e);

// Sample |u| = 2^s with s uniform in [lo, hi] and a random sign.
double log_uniform_signed(Rng& rng, double lo_exp, double hi_exp);

// body(i) for i < n on up to eight threads; each index runs exactly once.
template <class F>
void parallel_for(std::size_t n, F&& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto threads = static_cast<unsigned>(std::min<std::size_t>(std::min(hw, 8u), n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
}

}  // namespace zyg
