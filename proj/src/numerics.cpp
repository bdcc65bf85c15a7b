#include "zygmund/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace zyg {

namespace {

constexpr std::size_t kLeaf = 16;

double pairwise_rec(const double* p, std::size_t n) {
  if (n <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_rec(p, h) + pairwise_rec(p + h, n - h);
}

double pairwise_dot_rec(const double* a, const double* b, std::size_t n) {
  if (n <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_dot_rec(a, b, h) + pairwise_dot_rec(a + h, b + h, n - h);
}

}  // namespace

double pairwise_sum(std::span<const double> v) {
  return pairwise_rec(v.data(), v.size());
}

double pairwise_dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("pairwise_dot: size mismatch");
  return pairwise_dot_rec(a.data(), b.data(), a.size());
}

LinearFit ols_fit(std::vector<double> x, std::vector<double> y, int drop) {
  if (x.size() != y.size()) throw std::invalid_argument("ols_fit: size mismatch");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  LinearFit fit;
  for (std::size_t i = static_cast<std::size_t>(std::max(drop, 0)); i < order.size(); ++i) {
    fit.x.push_back(x[order[i]]);
    fit.y.push_back(y[order[i]]);
  }
  const std::size_t n = fit.x.size();
  if (n < 2) throw std::invalid_argument("ols_fit: fewer than two points after dropping");
  const double mx = std::accumulate(fit.x.begin(), fit.x.end(), 0.0) / n;
  const double my = std::accumulate(fit.y.begin(), fit.y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (fit.x[i] - mx) * (fit.x[i] - mx);
    sxy += (fit.x[i] - mx) * (fit.y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_fit: degenerate abscissae");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = fit.y[i] - (fit.intercept + fit.slope * fit.x[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y, int drop) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("loglog_fit: nonpositive value");
    lx[i] = std::log2(x[i]);
    ly[i] = std::log2(y[i]);
  }
  return ols_fit(std::move(lx), std::move(ly), drop);
}

double exp2i(int e) { return std::ldexp(1.0, e); }

double log_uniform_signed(Rng& rng, double lo_exp, double hi_exp) {
  std::uniform_real_distribution<double> u(lo_exp, hi_exp);
  std::bernoulli_distribution sgn(0.5);
  const double mag = std::exp2(u(rng));
  return sgn(rng) ? mag : -mag;
}

}  // namespace zyg
