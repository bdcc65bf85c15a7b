#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "zygmund/dyadic.hpp"
#include "zygmund/numerics.hpp"

using namespace zyg;

namespace {

// Marks which finest units each interval of a level covers; every unit exactly once.
bool level_partitions(const ShiftedGrid& g, int level) {
  const std::int64_t n = std::int64_t{1} << g.l_max();
  std::vector<int> cover(static_cast<std::size_t>(n), 0);
  for (const auto& I : g.level_intervals(level)) {
    const std::int64_t u = g.left_units(I);
    for (std::int64_t t = 0; t < g.length_units(level); ++t) ++cover[static_cast<std::size_t>((u + t) % n)];
  }
  for (int c : cover)
    if (c != 1) return false;
  return true;
}

}  // namespace

TEST_CASE("Dyadic rationals are kept reduced") {
  CHECK(Dyadic::make(2, 2) == Dyadic::make(1, 1));
  CHECK(Dyadic::make(0, 5) == Dyadic{0, 0});
  CHECK(Dyadic::pow2(-3) == Dyadic::make(1, 3));
  CHECK(Dyadic::pow2(2).value() == 4.0);
  CHECK(Dyadic::make(3, 2) < Dyadic::make(1, 0));
  CHECK(Dyadic::make(3, 2).denominator() == 4);
}

TEST_CASE("zero pattern gives the standard grid") {
  const auto g = build_lattice(ShiftPattern::zeros(3), 3);
  for (int j = 0; j <= 3; ++j) {
    CHECK(g.offset(j) == Dyadic{0, 0});
    for (std::int64_t m = 0; m < (1 << j); ++m) CHECK(g.interval(j, m).left() == Dyadic::make(m, j));
  }
}

TEST_CASE("omega_1 = 1 moves the level-0 interval by 1/2") {
  const auto g = build_lattice(ShiftPattern::from_integer(3, 0b001), 3);
  const auto I = g.interval(0, 0);
  CHECK(I.offset == Dyadic::make(1, 1));
  CHECK(I.left() == Dyadic::make(1, 1));
  CHECK(g.left_units(I) == 4);
  for (int j = 1; j <= 3; ++j) CHECK(g.offset(j) == Dyadic{0, 0});
}

TEST_CASE("offsets equal the truncated shift sums") {
  for (std::uint64_t code = 0; code < 64; ++code) {
    const auto p = ShiftPattern::from_integer(6, code);
    const auto g = build_lattice(p, 6);
    for (int j = 0; j <= 6; ++j) {
      std::int64_t num = 0;  // units of 2^-6
      for (int i = j + 1; i <= 6; ++i) num += p.bit(i) * (std::int64_t{1} << (6 - i));
      CHECK(g.offset(j) == Dyadic::make(num, 6));
    }
  }
}

TEST_CASE("every level partitions the window for all patterns at L_max = 4") {
  for (std::uint64_t code = 0; code < 16; ++code) {
    const auto g = build_lattice(ShiftPattern::from_integer(4, code), 4);
    for (int j = 0; j <= 4; ++j) CHECK(level_partitions(g, j));
  }
}

TEST_CASE("nesting: each interval lies in exactly one interval of the next coarser level") {
  for (std::uint64_t code = 0; code < 32; ++code) {
    const auto g = build_lattice(ShiftPattern::from_integer(5, code), 5);
    for (int j = 1; j <= 5; ++j)
      for (const auto& I : g.level_intervals(j)) {
        int hits = 0;
        for (const auto& P : g.level_intervals(j - 1)) hits += g.contains(P, I);
        CHECK(hits == 1);
      }
  }
}

TEST_CASE("k_parent examples and errors") {
  const auto g = ShiftedGrid::standard(4);
  const auto I = g.interval(2, 1);  // [1/4, 1/2)
  CHECK(g.k_parent(I, 2) == g.interval(0, 0));
  CHECK(g.k_parent(I, 0) == I);
  CHECK(g.k_parent(I, 1) == g.interval(1, 0));
  CHECK_THROWS_AS(g.k_parent(I, 3), LevelUnderflow);
}

TEST_CASE("children of the parent contain the interval on random shifted lattices") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = build_lattice(ShiftPattern::random(6, seed), 6);
    for (int j = 1; j <= 6; ++j)
      for (const auto& I : g.level_intervals(j)) {
        const auto ch = g.children(g.k_parent(I, 1));
        REQUIRE(ch.size() == 2);
        CHECK((ch[0] == I || ch[1] == I));
        CHECK(g.contains(g.k_parent(I, 1), I));
      }
  }
}

TEST_CASE("translate_dot arithmetic and group law") {
  const auto g = ShiftedGrid::standard(3);
  CHECK(translate_dot(g.interval(2, 0), 2).left() == Dyadic::make(1, 1));
  CHECK(translate_dot(g.interval(2, 1), 0) == g.interval(2, 1));
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    const auto gs = build_lattice(ShiftPattern::random(6, rng()), 6);
    const int j = static_cast<int>(rng() % 7);
    const auto I = gs.interval(j, static_cast<std::int64_t>(rng() % 64));
    const std::int64_t n = static_cast<std::int64_t>(rng() % 201) - 100;
    const auto T = translate_dot(I, n);
    CHECK(T.level == I.level);
    CHECK(translate_dot(T, -n) == I);
    const std::int64_t span = std::int64_t{1} << 6;
    CHECK(((gs.left_units(I) + n * gs.length_units(j)) % span + span) % span == gs.left_units(T));
  }
}

TEST_CASE("is_k_good examples") {
  const auto g = ShiftedGrid::standard(4);
  CHECK(g.is_k_good(g.interval(2, 1), 2));
  CHECK_FALSE(g.is_k_good(g.interval(2, 0), 2));
  CHECK_FALSE(g.is_k_good(g.interval(2, 3), 2));
  CHECK_THROWS(g.is_k_good(g.interval(2, 1), 1));
  CHECK_THROWS_AS(g.is_k_good(g.interval(1, 1), 2), LevelUnderflow);
}

TEST_CASE("k-good intervals keep their k-parent under small dot translations") {
  std::int64_t checked = 0;
  for (int L = 2; L <= 6; ++L)
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << L); ++code) {
      const auto g = build_lattice(ShiftPattern::from_integer(L, code), L);
      for (int k = 2; k <= L; ++k)
        for (int j = k; j <= L; ++j)
          for (const auto& G : g.level_intervals(j)) {
            if (!g.is_k_good(G, k)) continue;
            const std::int64_t q = std::int64_t{1} << (k - 2);
            for (std::int64_t n = -q; n <= q; ++n) {
              CHECK(g.k_parent(translate_dot(G, n), k) == g.k_parent(G, k));
              ++checked;
            }
          }
    }
  CHECK(checked > 0);
}

TEST_CASE("goodness probability is exactly 1/2") {
  for (int level = 2; level <= 6; ++level)
    for (int k = 2; k <= level; ++k) {
      const auto r = goodness_probability(level, k, 6);
      CHECK(r.total_patterns == (std::int64_t{1} << k));
      CHECK(r.probability == boost::rational<std::int64_t>(1, 2));
      CHECK(r.probability == boost::rational<std::int64_t>(r.good_patterns, r.total_patterns));
    }
  CHECK(goodness_probability(4, 2, 4).probability == boost::rational<std::int64_t>(1, 2));
  CHECK(goodness_probability(5, 3, 5).probability == boost::rational<std::int64_t>(1, 2));
}

TEST_CASE("goodness report ignores the bits outside the parent window") {
  const auto base = goodness_probability(5, 3, 8, 7, 0);
  for (std::uint64_t tail = 1; tail < 256; tail += 17) {
    const auto r = goodness_probability(5, 3, 8, 7, tail);
    CHECK(r.good_patterns == base.good_patterns);
    CHECK(r.total_patterns == base.total_patterns);
  }
}

TEST_CASE("goodness preconditions") {
  CHECK_THROWS(goodness_probability(4, 1, 6));
  CHECK_THROWS_AS(goodness_probability(2, 3, 6), LevelUnderflow);
}

TEST_CASE("lattice dump lists (level, index, offset numerator, offset denominator)") {
  const auto g = build_lattice(ShiftPattern::from_integer(2, 0b01), 2);
  const auto js = g.to_json();
  CHECK(js.size() == 1 + 2 + 4);
  CHECK(js[0] == nlohmann::json({0, 0, 1, 2}));
  CHECK(js[1] == nlohmann::json({1, 0, 0, 1}));
}

TEST_CASE("ShiftPattern validation") {
  CHECK_THROWS(ShiftPattern({0, 2}));
  CHECK_THROWS(ShiftedGrid(ShiftPattern::zeros(3), 4));
  CHECK_THROWS(ShiftedGrid(ShiftPattern::zeros(0), 0));
  const auto p = ShiftPattern::random(10, 1);
  CHECK(p.l_max() == 10);
  CHECK(ShiftPattern::random(10, 1).bits() == p.bits());
}
