#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "zygmund/mra.hpp"

using namespace zyg;

namespace {

Grids3 random_frame(Rng& rng, const Shape& s) {
  return Grids3{{ShiftedGrid(ShiftPattern::random(s.l1, rng()), s.l1), ShiftedGrid(ShiftPattern::random(s.l2, rng()), s.l2),
                 ShiftedGrid(ShiftPattern::random(s.l3, rng()), s.l3)}};
}

double norm_1d(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

ZygRectangle random_zyg(Rng& rng, const Shape& s, const Grids3& g) {
  const auto all = representable_zyg(s, g);
  return all[rng() % all.size()];
}

}  // namespace

TEST_CASE("haar_1d on the unit interval") {
  const auto g = ShiftedGrid::standard(1);
  CHECK(haar_1d(g, g.interval(0, 0), 1) == std::vector<double>{1.0, -1.0});
  CHECK(haar_1d(g, g.interval(0, 0), 0) == std::vector<double>{1.0, 1.0});
  CHECK_THROWS_AS(haar_1d(g, g.interval(1, 0), 1), ResolutionError);
}

TEST_CASE("1D Haar functions are normalized and h1 cancels") {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto g = ShiftedGrid(ShiftPattern::random(6, rng()), 6);
    const int j = static_cast<int>(rng() % 6);
    const auto J = g.interval(j, static_cast<std::int64_t>(rng() % 64));
    const auto h0 = haar_1d(g, J, 0), h1 = haar_1d(g, J, 1);
    CHECK(norm_1d(h0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(norm_1d(h1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::fabs(pairwise_sum(h1)) < 1e-12);
  }
}

TEST_CASE("(2,3) Haar functions have unit norm for every signature") {
  Rng rng(2);
  const Shape s{2, 2, 4};
  const auto g = random_frame(rng, s);
  for (int t = 0; t < 20; ++t) {
    const auto I = random_zyg(rng, s, g);
    for (int eta : kCancellativeEtas) CHECK(norm2(h_IZ(s, g, I, eta)) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("block operators agree with compositions of axis operators") {
  Rng rng(3);
  const Shape s{2, 2, 4};
  for (int frame_kind = 0; frame_kind < 2; ++frame_kind) {
    const auto g = frame_kind == 0 ? standard_frame(s) : random_frame(rng, s);
    for (int t = 0; t < 30; ++t) {
      const auto f = random_grid(s, rng);
      const auto I = random_zyg(rng, s, g);
      for (Op x1 : {Op::E, Op::Delta})
        for (Op x23 : {Op::E, Op::Delta}) {
          const auto oracle = axis_op(rect23_op(f, g, I[1], I[2], x23), g, 0, I[0], x1);
          CHECK(max_abs_diff(block_op(f, g, I.rect(), x1, x23), oracle) < 1e-13);
        }
    }
  }
}

TEST_CASE("the one-parameter difference on I^{2,3} splits into three bi-parameter pieces") {
  Rng rng(4);
  const Shape s{2, 3, 5};
  const auto g = random_frame(rng, s);
  for (int t = 0; t < 20; ++t) {
    const auto f = random_grid(s, rng);
    const auto I2 = g.axis[1].interval(static_cast<int>(rng() % 3), static_cast<std::int64_t>(rng() % 8));
    const auto I3 = g.axis[2].interval(static_cast<int>(rng() % 5), static_cast<std::int64_t>(rng() % 32));
    auto D2 = [&](const GridFunction3D& u) { return axis_op(u, g, 1, I2, Op::Delta); };
    auto E2 = [&](const GridFunction3D& u) { return axis_op(u, g, 1, I2, Op::E); };
    auto D3 = [&](const GridFunction3D& u) { return axis_op(u, g, 2, I3, Op::Delta); };
    auto E3 = [&](const GridFunction3D& u) { return axis_op(u, g, 2, I3, Op::E); };
    const auto rhs = D2(D3(f)) + E2(D3(f)) + D2(E3(f));
    CHECK(max_abs_diff(rect23_op(f, g, I2, I3, Op::Delta), rhs) < 1e-13);
  }
}

TEST_CASE("delta_Z reproduces its own Haar functions and kills the others") {
  Rng rng(5);
  const Shape s{2, 2, 4};
  const auto g = random_frame(rng, s);
  const auto all = representable_zyg(s, g);
  for (int t = 0; t < 10; ++t) {
    const auto I = all[rng() % all.size()];
    const int eta = 1 + static_cast<int>(rng() % 3);
    const auto h = h_IZ(s, g, I, eta);
    for (const auto& J : all) {
      const auto d = delta_Z(h, g, J);
      if (J == I)
        CHECK(max_abs_diff(d, h) < 1e-13);
      else
        CHECK(d.max_abs() < 1e-13);
    }
  }
}

TEST_CASE("delta_Z has zero x1 integrals and zero (x2,x3) integrals") {
  Rng rng(6);
  const Shape s{2, 2, 4};
  const auto g = random_frame(rng, s);
  for (int t = 0; t < 20; ++t) {
    const auto d = delta_Z(random_grid(s, rng), g, random_zyg(rng, s, g));
    for (std::int64_t b = 0; b < s.n2(); ++b)
      for (std::int64_t c = 0; c < s.n3(); ++c) {
        double acc = 0.0;
        for (std::int64_t a = 0; a < s.n1(); ++a) acc += d.at(a, b, c);
        CHECK(std::fabs(acc) < 1e-12);
      }
    for (std::int64_t a = 0; a < s.n1(); ++a) {
      double acc = 0.0;
      for (std::int64_t b = 0; b < s.n2(); ++b)
        for (std::int64_t c = 0; c < s.n3(); ++c) acc += d.at(a, b, c);
      CHECK(std::fabs(acc) < 1e-12);
    }
  }
}

TEST_CASE("delta_Z is self-adjoint and idempotent") {
  Rng rng(7);
  const Shape s{2, 2, 4};
  const auto g = random_frame(rng, s);
  for (int t = 0; t < 30; ++t) {
    const auto f = random_grid(s, rng), h = random_grid(s, rng);
    const auto I = random_zyg(rng, s, g);
    CHECK(inner(delta_Z(f, g, I), h) == doctest::Approx(inner(f, delta_Z(h, g, I))).epsilon(1e-12));
    CHECK(max_abs_diff(delta_Z(delta_Z(f, g, I), g, I), delta_Z(f, g, I)) < 1e-13);
  }
}

TEST_CASE("coefficients are inner products with h_{I,Z} and rebuild delta_Z") {
  Rng rng(8);
  const Shape s{2, 2, 4};
  const auto g = random_frame(rng, s);
  for (int t = 0; t < 20; ++t) {
    const auto f = random_grid(s, rng);
    const auto I = random_zyg(rng, s, g);
    const auto c = zyg_coeffs(f, g, I.rect());
    auto sum = GridFunction3D::zeros(s);
    for (int eta : kCancellativeEtas) {
      const auto h = h_IZ(s, g, I, eta);
      CHECK(c[static_cast<std::size_t>(eta - 1)] == doctest::Approx(inner(f, h)).epsilon(1e-12));
      sum = sum + h * c[static_cast<std::size_t>(eta - 1)];
    }
    CHECK(max_abs_diff(sum, delta_Z(f, g, I)) < 1e-13);
  }
}

TEST_CASE("block_values matches block_op on the children") {
  Rng rng(9);
  const Shape s{2, 2, 4};
  const auto g = random_frame(rng, s);
  const auto f = random_grid(s, rng);
  const auto I = random_zyg(rng, s, g);
  const auto R = block_values(f, g, I.rect(), Op::Delta, Op::Delta);
  const auto full = delta_Z(f, g, I);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        const auto ca = g.axis[0].children(I[0])[static_cast<std::size_t>(a)];
        const auto cb = g.axis[1].children(I[1])[static_cast<std::size_t>(b)];
        const auto cc = g.axis[2].children(I[2])[static_cast<std::size_t>(c)];
        const double v = full.at(g.axis[0].left_units(ca), g.axis[1].left_units(cb), g.axis[2].left_units(cc));
        CHECK(v == doctest::Approx(R[static_cast<std::size_t>(4 * a + 2 * b + c)]).epsilon(1e-13));
      }
}

TEST_CASE("level operators are the sums of the interval operators") {
  Rng rng(10);
  const Shape s{3, 2, 5};
  const auto g = random_frame(rng, s);
  const auto f = random_grid(s, rng);
  for (int j1 = 0; j1 < 3; ++j1) {
    auto acc = GridFunction3D::zeros(s);
    for (const auto& I : g.axis[0].level_intervals(j1)) acc = acc + axis_op(f, g, 0, I, Op::Delta);
    CHECK(max_abs_diff(level_op1(f, g, j1, Op::Delta), acc) < 1e-13);
  }
  for (int j2 = 0; j2 < 2; ++j2)
    for (int j3 = 0; j3 < 5; ++j3) {
      auto acc = GridFunction3D::zeros(s);
      for (const auto& I2 : g.axis[1].level_intervals(j2))
        for (const auto& I3 : g.axis[2].level_intervals(j3)) acc = acc + rect23_op(f, g, I2, I3, Op::Delta);
      CHECK(max_abs_diff(level_op23(f, g, j2, j3, Op::Delta), acc) < 1e-13);
    }
}

TEST_CASE("expansion of a single Haar function") {
  Rng rng(11);
  const Shape s{2, 2, 4};
  const auto g = random_frame(rng, s);
  const auto I = random_zyg(rng, s, g);
  const auto e = expand_Z(h_IZ(s, g, I, 2), g);
  int nonzero = 0;
  for (const auto& c : e.coeffs) {
    if (std::fabs(c.value) > 1e-13) {
      ++nonzero;
      CHECK(c.rect == I.rect());
      CHECK(c.eta == 2);
      CHECK(c.value == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
  CHECK(nonzero == 1);
  CHECK(e.remainder.max_abs() < 1e-13);
}

TEST_CASE("constants are pure remainder") {
  const Shape s{2, 2, 4};
  const auto g = standard_frame(s);
  const auto e = expand_Z(GridFunction3D::constant(s, 3.0), g);
  for (const auto& c : e.coeffs) CHECK(std::fabs(c.value) < 1e-13);
  CHECK(max_abs_diff(e.remainder, GridFunction3D::constant(s, 3.0)) < 1e-13);
}

TEST_CASE("reconstruction, Parseval with remainder, and remainder orthogonality") {
  Rng rng(12);
  const Shape s{2, 2, 4};
  for (int t = 0; t < 10; ++t) {
    const auto g = random_frame(rng, s);
    const auto f = random_grid(s, rng);
    const auto e = expand_Z(f, g);
    CHECK(e.coeffs.size() == 3 * representable_zyg(s, g).size());
    CHECK(max_abs_diff(reconstruct(e, g), f) <= 1e-12 * f.max_abs());
    double mass = 0.0;
    for (const auto& c : e.coeffs) mass += c.value * c.value;
    const double nf = inner(f, f);
    CHECK(std::fabs(nf - mass - inner(e.remainder, e.remainder)) <= 1e-12 * nf);
    for (const auto& c : expand_Z(e.remainder, g).coeffs) CHECK(std::fabs(c.value) < 1e-12);
  }
}

TEST_CASE("H functions: zero when I = J, bounded, mean zero, and length checks") {
  Rng rng(13);
  const auto g = ShiftedGrid(ShiftPattern::random(6, 1), 6);
  const auto I = g.interval(3, 2);
  auto H = build_H(g, I, I, HVariant::ZeroIMinusZeroJ);
  for (double v : H.values) CHECK(v == 0.0);
  for (int t = 0; t < 50; ++t) {
    const int j = 1 + static_cast<int>(rng() % 5);
    const auto A = g.interval(j, static_cast<std::int64_t>(rng() % 64));
    const auto B = translate_dot(A, 1);
    const double bound = std::sqrt(std::ldexp(1.0, j));
    for (HVariant v : kHVariants) {
      const auto h = build_H(g, A, B, v);
      CHECK(std::fabs(pairwise_sum(h.values)) < 1e-12);
      for (double x : h.values) CHECK(std::fabs(x) <= bound * (1 + 1e-15));
      for (std::int64_t u = 0; u < 64; ++u) {
        const bool in = g.locate(j, u) == A || g.locate(j, u) == B;
        if (!in) CHECK(h.values[static_cast<std::size_t>(u)] == 0.0);
      }
    }
  }
  CHECK_THROWS_AS(build_H(g, g.interval(2, 0), g.interval(3, 0), HVariant::HaarI), ShapeError);
}

TEST_CASE("(2,3) H functions share the defining properties") {
  Rng rng(14);
  const auto g2 = ShiftedGrid(ShiftPattern::random(3, 2), 3), g3 = ShiftedGrid(ShiftPattern::random(5, 3), 5);
  for (int t = 0; t < 30; ++t) {
    const int j2 = static_cast<int>(rng() % 3), j3 = static_cast<int>(rng() % 5);
    const std::array<DyadicInterval, 2> I{g2.interval(j2, static_cast<std::int64_t>(rng())),
                                          g3.interval(j3, static_cast<std::int64_t>(rng()))};
    const std::array<DyadicInterval, 2> J{translate_dot(I[0], static_cast<std::int64_t>(rng() % 2)),
                                          translate_dot(I[1], 1)};
    const double bound = std::sqrt(std::ldexp(1.0, j2 + j3));
    for (HVariant v : kHVariants)
      for (int eta : kCancellativeEtas) {
        const auto h = build_H(g2, g3, I, J, v, eta);
        CHECK(h.values.size() == 8u * 32u);
        CHECK(std::fabs(pairwise_sum(h.values)) < 1e-11);
        for (double x : h.values) CHECK(std::fabs(x) <= bound * (1 + 1e-15));
      }
  }
  const std::array<DyadicInterval, 2> I{g2.interval(1, 0), g3.interval(2, 0)};
  const std::array<DyadicInterval, 2> J{g2.interval(1, 1), g3.interval(3, 0)};
  CHECK_THROWS_AS(build_H(g2, g3, I, J, HVariant::HaarJ, 3), ShapeError);
}

TEST_CASE("tensor checks factor sizes") {
  const Shape s{1, 1, 2};
  CHECK_THROWS_AS(tensor(s, {1.0}, std::vector<double>(8, 0.0)), ShapeError);
  const auto t = tensor(s, {1.0, 2.0}, std::vector<double>(8, 1.0));
  CHECK(t.at(1, 1, 3) == 2.0);
}

TEST_CASE("grid function serialization round-trips bit for bit") {
  Rng rng(15);
  const Shape s{2, 1, 3};
  const auto f = random_grid(s, rng);
  const auto b = f.to_bytes();
  const auto back = GridFunction3D::from_bytes(b);
  CHECK(back.shape() == s);
  CHECK(back.values() == f.values());
  auto bad = b;
  bad.pop_back();
  CHECK_THROWS(GridFunction3D::from_bytes(bad));
}
