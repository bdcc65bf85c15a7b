#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "zygmund/kernels.hpp"
#include "zygmund/mra.hpp"

using namespace zyg;

namespace {

Point3 random_point(Rng& rng) {
  return {log_uniform_signed(rng, -6, 6), log_uniform_signed(rng, -6, 6), log_uniform_signed(rng, -6, 6)};
}

double oracle_psi(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

// Independent nested quadrature of K(s) * w1(s1) w2(s2) w3(s3) over boxes.
double nested_box(const KernelSpec& k, const std::array<std::pair<double, double>, 3>& box,
                  const std::array<std::function<double(double)>, 3>& w) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto f3 = [&](double s1, double s2) {
    return GK::integrate([&](double s3) { return kernel_eval(k, Point3{s1, s2, s3}) * w[2](s3); }, box[2].first,
                         box[2].second, 10, 1e-12);
  };
  auto f2 = [&](double s1) {
    return GK::integrate([&](double s2) { return f3(s1, s2) * w[1](s2); }, box[1].first, box[1].second, 10, 1e-12);
  };
  return GK::integrate([&](double s1) { return f2(s1) * w[0](s1); }, box[0].first, box[0].second, 10, 1e-12);
}

GridFunction3D box_indicator(const Shape& s, std::array<std::int64_t, 3> lo, std::array<std::int64_t, 3> hi) {
  return GridFunction3D::from_cells(s, [&](std::int64_t a, std::int64_t b, std::int64_t c) {
    return (a >= lo[0] && a < hi[0] && b >= lo[1] && b < hi[1] && c >= lo[2] && c < hi[2]) ? 1.0 : 0.0;
  });
}

}  // namespace

TEST_CASE("Nagel-Wainger values and antisymmetry") {
  const auto k = nagel_wainger();
  CHECK(kernel_eval(k, Point3{1, 1, 1}) == 0.5);
  CHECK(kernel_eval(k, Point3{-1, 1, 1}) == -0.5);
  CHECK(kernel_eval(k, Point3{2, 3, 4}, Point3{1, 2, 3}) == 0.5);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto x = random_point(rng);
    const double v = kernel_eval(k, x);
    CHECK(kernel_eval(k, Point3{-x[0], x[1], x[2]}) == -v);
    CHECK(kernel_eval(k, Point3{x[0], -x[1], x[2]}) == -v);
    CHECK(kernel_eval(k, Point3{x[0], x[1], -x[2]}) == v);
  }
  CHECK_THROWS_AS(kernel_eval(k, Point3{0, 1, 1}), DomainError);
  CHECK_THROWS_AS(kernel_eval(k, Point3{1, 1, 0}), DomainError);
}

TEST_CASE("decay factors") {
  CHECK(D_theta(Point3{1, 1, 2}, 1.0) == doctest::Approx(0.4).epsilon(1e-15));
  Rng rng(5);
  for (double theta : {0.25, 0.5, 1.0}) {
    for (int i = 0; i < 500; ++i) {
      const auto x = random_point(rng);
      CHECK(D_theta(x, theta) <= 1.0);
      CHECK(D_theta(Point3{x[0], x[1], x[0] * x[1]}, theta) == std::pow(2.0, -theta));
    }
  }
  CHECK_THROWS_AS(D_theta(Point3{1, 0, 1}, 1.0), DomainError);
}

TEST_CASE("D_log is dominated by D_{1-gamma}") {
  Rng rng(7);
  for (double gamma : {0.25, 0.5, 0.75}) {
    // log(u) u^{-gamma} peaks at u = e^{1/gamma}.
    const double analytic = 1.0 / (std::numbers::e * gamma);
    const double mesh = dlog_domination_constant(gamma);
    CHECK(mesh <= analytic * (1 + 1e-15));
    CHECK(mesh >= analytic * (1 - 1e-3));
    CHECK(mesh <= 1.0 / gamma);
    for (int i = 0; i < 2000; ++i) {
      const auto x = random_point(rng);
      CHECK(D_log(x) <= analytic * D_theta(x, 1.0 - gamma) * (1 + 1e-14));
    }
  }
  CHECK_THROWS_AS(dlog_domination_constant(1.0), std::invalid_argument);
}

TEST_CASE("bump function") {
  const Bump& b = Bump::standard();
  // The raw profile decreases on [0,1], so the normalization is fixed by x = 1.
  const double A = 1.0 / (2.0 * oracle_psi(0.5) - oracle_psi(0.25));
  CHECK(b.A() == doctest::Approx(A).epsilon(1e-12));
  CHECK(std::abs(b.integral(-10, 10)) <= 1e-10);
  double mn = 1e300;
  for (int i = 0; i <= 4000; ++i) mn = std::min(mn, b(-1.0 + i * 0.0005));
  CHECK(mn >= 1.0 - 1e-12);
  CHECK(mn <= 1.0 + 1e-12);
  for (double x : {4.0, 4.5, -4.0, -7.0}) CHECK(b(x) == 0.0);
  Rng rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (int i = 0; i < 20; ++i) {
    double lo = u(rng), hi = u(rng);
    CHECK(b(lo) == b(-lo));
    if (lo > hi) std::swap(lo, hi);
    const double oracle = ts.integrate([&](double s) { return A * (2 * oracle_psi(s / 2) - oracle_psi(s / 4)); },
                                       std::max(lo, -4.0), std::min(std::max(hi, -4.0), 4.0));
    CHECK(b.integral(lo, hi) == doctest::Approx(oracle).epsilon(1e-9).scale(1.0));
    CHECK(b.integral(hi, lo) == -b.integral(lo, hi));
  }
  CHECK_THROWS_AS(build_bump(Point3{1, 0, 1}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_bump(Point3{1, 1, 1}, 1.5), std::invalid_argument);
}

TEST_CASE("condition names round trip") {
  for (auto c : all_conditions()) CHECK(parse_condition(to_string(c)) == c);
  CHECK(parse_condition("Partial-Size") == Condition::PartialSize);
  CHECK_THROWS_AS(parse_condition("nope"), std::invalid_argument);
}

TEST_CASE("Nagel-Wainger size ratio and cancellation integrals") {
  const auto k = nagel_wainger();
  SamplePlan plan;
  const auto size = check_condition(k, Condition::Size, plan);
  CHECK(size.sup_ratio <= 2.0);
  CHECK(size.sup_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(size.maximizer.size() == 3);
  plan.samples = 500;
  for (auto c : {Condition::C1a, Condition::C1j, Condition::C2b, Condition::PartialSize, Condition::PartialHolder,
                 Condition::WBP}) {
    const auto r = check_condition(k, c, plan);
    CAPTURE(to_string(c));
    CHECK(r.sup_ratio <= 1e-10);
    CHECK(r.quadrature_failures == 0);
  }
  for (auto c : {Condition::Mixed1, Condition::Mixed23, Condition::Holder, Condition::R}) {
    const auto r = check_condition(k, c, plan);
    CHECK(std::isfinite(r.sup_ratio));
    CHECK(r.sup_ratio > 0.0);
  }
}

TEST_CASE("condition reports are deterministic in the seed") {
  SamplePlan plan;
  plan.samples = 300;
  const auto k = build_bump(Point3{1, 2, 1}, 0.5);
  const auto a = check_condition(k, Condition::R, plan);
  const auto b = check_condition(k, Condition::R, plan);
  CHECK(a.sup_ratio == b.sup_ratio);
  CHECK(a.maximizer == b.maximizer);
  CHECK(a.to_json()["condition"] == "R");
  plan.seed = 2;
  CHECK(check_condition(k, Condition::R, plan).maximizer != a.maximizer);
}

TEST_CASE("bump kernel conditions stay bounded across scales") {
  SamplePlan plan;
  plan.samples = 1000;
  for (const Point3& t : {Point3{1, 1, 1}, Point3{4, 1, 1}, Point3{1, 1, 16}}) {
    const auto k = build_bump(t, 1.0);
    for (auto c : {Condition::R, Condition::C1a, Condition::C1j, Condition::C2b}) {
      const auto r = check_condition(k, c, plan);
      CAPTURE(to_string(c));
      CHECK(std::isfinite(r.sup_ratio));
      CHECK(r.sup_ratio < 1e4);
      CHECK(r.quadrature_failures == 0);
    }
  }
}

TEST_CASE("separable bump integrals agree with generic folded quadrature") {
  const auto bump = build_bump(Point3{1.5, 0.5, 2.0}, 0.7);
  auto generic = custom_kernel([&](const Point3& x) { return kernel_eval(bump, x); }, "bump-as-custom", 0.7);
  std::array<AxisDomain, 3> axes;
  axes[0].kind = AxisDomain::Kind::Annulus;
  axes[0].lo = 0.3;
  axes[0].hi = 2.5;
  axes[1].kind = AxisDomain::Kind::Tent;
  axes[1].hi = 0.9;
  axes[2].x = 1.1;
  axes[2].h = 0.4;
  axes[2].diff = 1;
  const auto a = integrate_kernel(bump, axes);
  const auto g = integrate_kernel(generic, axes, 1e-11);
  CHECK(a.ok);
  CHECK(g.ok);
  CHECK(a.value == doctest::Approx(g.value).epsilon(1e-8));

  const auto pk = partial_kernel(bump, 0.7, 0.4, -0.9);
  const auto pg = partial_kernel(generic, 0.7, 0.4, -0.9, 1e-11);
  CHECK(pk.value == doctest::Approx(pg.value).epsilon(1e-8));
}

TEST_CASE("folded integrals of the Nagel-Wainger kernel vanish exactly") {
  const auto k = nagel_wainger();
  CHECK(partial_kernel(k, 0.5, 0.25, 0.125).value == 0.0);
  CHECK(self_pairing(k, Point3{0.5, 0.25, 0.125}).value == 0.0);
  std::array<AxisDomain, 3> bad;
  bad[0].kind = AxisDomain::Kind::Annulus;
  bad[0].lo = 2.0;
  bad[0].hi = 1.0;
  CHECK_THROWS_AS(integrate_kernel(k, bad), std::invalid_argument);
}

TEST_CASE("discretization of the zero kernel is the zero operator") {
  const Shape s{2, 2, 3};
  const auto zero = custom_kernel([](const Point3&) { return 0.0; }, "zero", 1.0, {true, true, true});
  const auto T = discretize(zero, s, Truncation{});
  Rng rng(1);
  const auto f = random_grid(s, rng);
  CHECK(T.apply(f).max_abs() == 0.0);
  CHECK(T.apply_adjoint(f).max_abs() == 0.0);
}

TEST_CASE("Nagel-Wainger discretization: antisymmetry and weak boundedness") {
  const Shape s{2, 2, 3};
  const auto T = discretize(nagel_wainger(), s, Truncation{});
  const std::size_t N = s.size();
  // Entries with a zero first or second difference vanish; reflection in the first difference flips the sign.
  for (std::int64_t a = 0; a < s.n1(); ++a)
    for (std::int64_t b = 0; b < s.n3(); ++b) {
      const std::size_t c = s.index(a, 1, b);
      for (std::int64_t a2 = 0; a2 < s.n1(); ++a2)
        for (std::int64_t b2 = 0; b2 < s.n3(); ++b2) CHECK(T.entry(c, s.index(a2, 1, b2)) == 0.0);
    }
  for (std::size_t c = 0; c < N; c += 7)
    for (std::size_t c2 = 0; c2 < N; c2 += 5) CHECK(std::isfinite(T.entry(c, c2)));
  CHECK(T.entry(s.index(2, 0, 1), s.index(0, 1, 3)) == -T.entry(s.index(0, 0, 1), s.index(2, 1, 3)));
  // Centered symmetric box.
  const auto one = box_indicator(s, {1, 1, 2}, {3, 3, 6});
  CHECK(std::abs(pairing(T, one, one)) <= 1e-10);
  // Translation invariance.
  CHECK(T.entry(s.index(1, 2, 3), s.index(0, 0, 0)) == T.entry(s.index(2, 3, 7), s.index(1, 1, 4)));
}

TEST_CASE("discretized entries match tent-weighted integrals away from the singular set") {
  const Shape s{2, 2, 2};
  const auto k = build_bump(Point3{0.5, 0.5, 0.5}, 1.0);
  const auto T = discretize(k, s, Truncation{});
  const double h = 0.25;
  auto tent = [h](double c) { return [c, h](double x) { return (h - std::abs(x - c)) / (h * h); }; };
  const std::array<std::int64_t, 3> d{2, -3, 2};
  std::array<std::pair<double, double>, 3> box;
  std::array<std::function<double(double)>, 3> w;
  for (int m = 0; m < 3; ++m) {
    const double c = static_cast<double>(d[static_cast<std::size_t>(m)]) * h;
    box[static_cast<std::size_t>(m)] = {c - h, c + h};
    w[static_cast<std::size_t>(m)] = tent(c);
  }
  // Split each tent at its apex for the oracle.
  double oracle = 0.0;
  for (int mask = 0; mask < 8; ++mask) {
    auto b = box;
    for (int m = 0; m < 3; ++m) {
      const double c = 0.5 * (box[static_cast<std::size_t>(m)].first + box[static_cast<std::size_t>(m)].second);
      if (mask >> m & 1)
        b[static_cast<std::size_t>(m)].first = c;
      else
        b[static_cast<std::size_t>(m)].second = c;
    }
    oracle += nested_box(k, b, w);
  }
  const double got = T.entry(s.index(2, 0, 3), s.index(0, 3, 1));
  // Eight Gauss points per tent piece against the edge of the bump support.
  CHECK(got == doctest::Approx(oracle).epsilon(1e-5));
}

TEST_CASE("truncation") {
  const Shape s{2, 2, 3};
  CHECK_THROWS_AS(discretize(nagel_wainger(), s, Truncation{{0.3, 0.0, 0.0}, {1, 1, 1}}), ConfigError);
  CHECK_THROWS_AS(discretize(nagel_wainger(), s, Truncation{{0.1, 0.0, 0.0}, {0.05, 1, 1}}), ConfigError);
  const auto plain = custom_kernel([](const Point3& x) { return 1.0 / std::abs(x[0] * x[1] * x[2]); }, "even", 1.0);
  const auto T = discretize(plain, s, Truncation{});
  CHECK(T.effective_eps()[0] == 0.25);
  CHECK(T.effective_eps()[2] == 0.125);
  CHECK(T.entry(s.index(0, 0, 0), s.index(0, 2, 3)) == 0.0);
  CHECK(T.entry(s.index(0, 0, 0), s.index(2, 2, 3)) > 0.0);
  // Cutting at N removes the far interactions.
  const auto near = discretize(build_bump(Point3{1, 1, 1}, 1.0), s, Truncation{{0, 0, 0}, {0.5, 0.5, 0.5}});
  CHECK(near.entry(s.index(0, 0, 0), s.index(3, 0, 0)) == 0.0);
  CHECK(near.entry(s.index(0, 0, 0), s.index(1, 1, 1)) != 0.0);
}

TEST_CASE("pairing is bilinear and local") {
  const Shape s{2, 2, 3};
  const auto T = discretize(build_bump(Point3{1, 1, 1}, 1.0), s, Truncation{{0, 0, 0}, {0.25, 0.25, 0.125}});
  Rng rng(13);
  const auto f = random_grid(s, rng), g = random_grid(s, rng), f2 = random_grid(s, rng);
  const double lhs = pairing(T, f * 2.0 + f2, g);
  const double rhs = 2.0 * pairing(T, f, g) + pairing(T, f2, g);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK(pairing(T, f, g * 3.0) == doctest::Approx(3.0 * pairing(T, f, g)).epsilon(1e-12));
  CHECK(pairing(T, f, g) == doctest::Approx(inner(f, T.apply_adjoint(g))).epsilon(1e-12));
  const auto corner = box_indicator(s, {0, 0, 0}, {1, 1, 1});
  const auto far = box_indicator(s, {3, 3, 6}, {4, 4, 8});
  CHECK(pairing(T, corner, far) == 0.0);
  CHECK_THROWS_AS(pairing(T, GridFunction3D::zeros(Shape{1, 1, 2}), g), std::invalid_argument);
}

TEST_CASE("Nagel-Wainger cancellation pairing") {
  const Shape s{3, 3, 4};
  const auto window = GridFunction3D::constant(s, 1.0);
  // Haar function of I^1 = [3/8, 5/8).
  auto h1 = [&](const GridFunction3D& x23) {
    return GridFunction3D::from_cells(s, [&](std::int64_t a, std::int64_t b, std::int64_t c) {
      const double sign = a == 3 ? -1.0 : (a == 4 ? 1.0 : 0.0);
      return sign * x23.at(a, b, c);
    });
  };
  const auto I23 = box_indicator(s, {0, 2, 4}, {8, 4, 8});
  const auto J23 = box_indicator(s, {0, 5, 9}, {8, 6, 12});
  // Same (2,3) box: exact cancellation by oddness in x2.
  const auto T = discretize(nagel_wainger(), s, Truncation{});
  const double scale = norm2(I23) * norm2(I23);
  CHECK(std::abs(pairing(T, window * 1.0 - window + I23, h1(I23))) <= 1e-12 * scale);
  // Disjoint (2,3) boxes with the x1 reach inside the window: T(1 x 1_I23) is constant along I^1.
  const auto Tn = discretize(nagel_wainger(), s, Truncation{{0, 0, 0}, {0.25, 1e300, 1e300}});
  const double v = pairing(Tn, I23, h1(J23));
  const double ref = std::abs(pairing(Tn, I23, box_indicator(s, {3, 5, 9}, {4, 6, 12})));
  CHECK(ref > 0.0);
  CHECK(std::abs(v) <= 1e-6 * ref);
}

TEST_CASE("discrete operators save and load") {
  const Shape s{1, 1, 2};
  const auto T = discretize(build_bump(Point3{1, 1, 1}, 1.0), s, Truncation{});
  const auto dir = std::filesystem::temp_directory_path() / "zyg_kernels_test";
  std::filesystem::create_directories(dir);
  const std::string stem = (dir / "op").string();
  T.save(stem);
  const auto U = DiscreteOperator::load(stem);
  Rng rng(2);
  const auto f = random_grid(s, rng);
  CHECK(max_abs_diff(T.apply(f), U.apply(f)) == 0.0);
  CHECK(U.provenance()["kernel"] == T.provenance()["kernel"]);
  const auto I = DiscreteOperator::identity(s);
  CHECK(max_abs_diff(I.apply(f), f) <= 1e-15);
  I.save(stem);
  CHECK(DiscreteOperator::load(stem).is_dense());
  std::filesystem::remove_all(dir);
}

TEST_CASE("correlation of step functions") {
  const std::vector<StepPiece> b{{0.0, 0.5, 1.0}, {0.5, 1.0, -2.0}};
  const std::vector<StepPiece> a{{0.25, 0.5, 3.0}, {0.5, 0.75, 1.0}};
  const auto c = correlation(b, a);
  // Oracle: midpoint rule on a fine mesh, exact for piecewise-constant products on dyadic breaks.
  auto brute = [&](double s) {
    const int n = 1 << 14;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = -1.0 + 4.0 * (i + 0.5) / n;
      double bv = 0.0, av = 0.0;
      for (const auto& p : b)
        if (x >= p.lo && x < p.hi) bv = p.value;
      for (const auto& q : a)
        if (x - s >= q.lo && x - s < q.hi) av = q.value;
      acc += bv * av;
    }
    return acc * 4.0 / n;
  };
  for (double s : {-1.0, -0.75, -0.5, -0.3125, 0.0, 0.125, 0.25, 0.5, 0.6875, 1.0})
    CHECK(c(s) == doctest::Approx(brute(s)).epsilon(1e-12).scale(1.0));
  CHECK(c(-5.0) == 0.0);
  CHECK(c(5.0) == 0.0);
}

TEST_CASE("continuous pairings agree with generic quadrature") {
  // Cells separated along x3 keep the integrand away from the singular set.
  const std::array<PiecewiseLinear, 3> c{
      correlation({{0.0, 0.25, 1.0}}, {{0.25, 0.5, 1.0}}),
      correlation({{0.0, 0.5, 1.0}, {0.5, 1.0, -1.0}}, {{0.0, 0.5, 1.0}}),
      correlation({{1.0, 1.25, 1.0}}, {{0.0, 0.5, 1.0}})};
  const auto nw = nagel_wainger();
  auto generic = custom_kernel([&](const Point3& x) { return kernel_eval(nw, x); }, "nw-as-custom", 1.0, nw.odd);
  const auto a = continuous_pairing(nw, c);
  const auto g = continuous_pairing(generic, c, 1e-11);
  CHECK(a.ok);
  CHECK(a.value != 0.0);
  CHECK(a.value == doctest::Approx(g.value).epsilon(1e-7));

  const auto bump = build_bump(Point3{0.5, 1.0, 2.0}, 1.0);
  auto bump_generic = custom_kernel([&](const Point3& x) { return kernel_eval(bump, x); }, "bump-as-custom", 1.0);
  const auto b1 = continuous_pairing(bump, c);
  const auto b2 = continuous_pairing(bump_generic, c, 1e-11);
  CHECK(b1.value == doctest::Approx(b2.value).epsilon(1e-7));
}

TEST_CASE("convolution with the scaled bump dominates the average on the box") {
  Rng rng(17);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    Box R;
    for (int m = 0; m < 3; ++m) {
      R.lo[static_cast<std::size_t>(m)] = u(rng) - 1.5;
      R.hi[static_cast<std::size_t>(m)] = R.lo[static_cast<std::size_t>(m)] + u(rng);
    }
    const auto f = random_grid(Shape{2, 1, 3}, rng, 0.0, 1.0);
    const auto rep = convolution_lower_bound(R, f);
    CHECK(rep.holds(1e-6));
    CHECK(rep.points == 6u * 4u * 10u);
  }
  CHECK_THROWS_AS(convolution_lower_bound(Box{{0, 0, 0}, {1, 1, 1}}, GridFunction3D::constant(Shape{1, 1, 1}, -1.0)),
                  std::invalid_argument);
}
