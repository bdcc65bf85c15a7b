#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "zygmund/numerics.hpp"

using namespace zyg;

TEST_CASE("pairwise_sum agrees with long double accumulation") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {0u, 1u, 15u, 16u, 17u, 1000u, 65537u}) {
    std::vector<double> v(n);
    long double ref = 0.0L;
    for (auto& x : v) {
      x = u(rng);
      ref += x;
    }
    CHECK(pairwise_sum(v) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
  }
}

TEST_CASE("pairwise_sum is exact on many small dyadic values") {
  std::vector<double> v(1 << 20, 1.0 / 1024.0);
  CHECK(pairwise_sum(v) == 1024.0);
}

TEST_CASE("pairwise_dot matches a naive dot product") {
  Rng rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(777), b(777);
  for (auto& x : a) x = u(rng);
  for (auto& x : b) x = u(rng);
  const double naive = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  CHECK(pairwise_dot(a, b) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("ols_fit recovers an exact line and drops the smallest abscissae") {
  std::vector<double> x{5, 1, 2, 3, 4}, y;
  for (double t : x) y.push_back(2.5 * t - 1.0);
  y[1] = 100.0;  // x = 1 is an outlier and gets dropped
  const auto fit = ols_fit(x, y, 1);
  CHECK(fit.slope == doctest::Approx(2.5));
  CHECK(fit.intercept == doctest::Approx(-1.0));
  CHECK(fit.residual < 1e-12);
  CHECK(fit.x.size() == 4);
}

TEST_CASE("loglog_fit reads the exponent of a power law") {
  std::vector<double> x, y;
  for (int j = 0; j < 10; ++j) {
    x.push_back(std::ldexp(1.0, j));
    y.push_back(3.0 * std::pow(x.back(), 1.7));
  }
  CHECK(loglog_fit(x, y).slope == doctest::Approx(1.7));
}

TEST_CASE("exp2i and log_uniform_signed") {
  CHECK(exp2i(-3) == 0.125);
  CHECK(exp2i(10) == 1024.0);
  Rng rng(9);
  int neg = 0;
  for (int i = 0; i < 1000; ++i) {
    const double v = log_uniform_signed(rng, -8, 8);
    CHECK(std::fabs(v) >= std::ldexp(1.0, -8));
    CHECK(std::fabs(v) <= std::ldexp(1.0, 8));
    neg += v < 0;
  }
  CHECK(neg > 400);
  CHECK(neg < 600);
}
