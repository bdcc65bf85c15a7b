#include "zygmund/dyadic.hpp"

#include <cmath>
#include <random>

namespace zyg {

Dyadic Dyadic::make(std::int64_t num, int level) {
  if (level < 0) {
    if (level < -62) throw std::overflow_error("Dyadic: exponent out of range");
    return Dyadic{num << (-level), 0};
  }
  while (level > 0 && (num % 2) == 0) {
    num /= 2;
    --level;
  }
  if (num == 0) level = 0;
  return Dyadic{num, level};
}

Dyadic Dyadic::pow2(int e) { return e >= 0 ? make(std::int64_t{1} << e, 0) : make(1, -e); }

double Dyadic::value() const { return std::ldexp(static_cast<double>(num), -level); }

std::int64_t Dyadic::denominator() const { return std::int64_t{1} << level; }

bool operator<(const Dyadic& a, const Dyadic& b) {
  const int l = std::max(a.level, b.level);
  return (a.num << (l - a.level)) < (b.num << (l - b.level));
}

ShiftPattern::ShiftPattern(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_)
    if (b > 1) throw std::invalid_argument("ShiftPattern: bits must be 0 or 1");
}

ShiftPattern ShiftPattern::zeros(int l_max) {
  return ShiftPattern(std::vector<std::uint8_t>(static_cast<std::size_t>(l_max), 0));
}

ShiftPattern ShiftPattern::from_integer(int l_max, std::uint64_t code) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(l_max));
  for (int i = 0; i < l_max; ++i) bits[static_cast<std::size_t>(i)] = (code >> i) & 1u;
  return ShiftPattern(std::move(bits));
}

ShiftPattern ShiftPattern::random(int l_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(l_max));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
  return ShiftPattern(std::move(bits));
}

Dyadic DyadicInterval::left() const {
  // index*2^-level + offset reduced mod 1
  const int l = std::max(level, offset.level);
  const std::int64_t den = std::int64_t{1} << l;
  std::int64_t n = (index << (l - level)) + (offset.num << (l - offset.level));
  n %= den;
  if (n < 0) n += den;
  return Dyadic::make(n, l);
}

Dyadic DyadicInterval::side_length() const { return Dyadic::make(1, level); }

ShiftedGrid::ShiftedGrid(ShiftPattern pattern, int l_max) : pattern_(std::move(pattern)), l_max_(l_max) {
  if (l_max < 1) throw std::invalid_argument("ShiftedGrid: L_max must be >= 1");
  if (l_max > 62) throw std::invalid_argument("ShiftedGrid: L_max too large");
  if (pattern_.l_max() != l_max) throw std::invalid_argument("ShiftedGrid: pattern length must equal L_max");
  offsets_.assign(static_cast<std::size_t>(l_max + 1), 0);
  // offset_j = sum_{i>j} omega_i 2^{L_max-i}
  for (int j = l_max - 1; j >= 0; --j)
    offsets_[static_cast<std::size_t>(j)] =
        offsets_[static_cast<std::size_t>(j + 1)] + (pattern_.bit(j + 1) ? (std::int64_t{1} << (l_max - j - 1)) : 0);
}

ShiftedGrid ShiftedGrid::standard(int l_max) { return ShiftedGrid(ShiftPattern::zeros(l_max), l_max); }

Dyadic ShiftedGrid::offset(int level) const { return Dyadic::make(offset_units(level), l_max_); }

std::int64_t ShiftedGrid::left_units(const DyadicInterval& I) const {
  const std::int64_t n = std::int64_t{1} << l_max_;
  std::int64_t u = (I.index << (l_max_ - I.level)) + offset_units(I.level);
  u %= n;
  if (u < 0) u += n;
  return u;
}

DyadicInterval ShiftedGrid::interval(int level, std::int64_t index) const {
  if (level < 0 || level > l_max_) throw std::out_of_range("ShiftedGrid: level out of range");
  const std::int64_t n = std::int64_t{1} << level;
  index %= n;
  if (index < 0) index += n;
  return DyadicInterval{level, index, offset(level)};
}

std::vector<DyadicInterval> ShiftedGrid::level_intervals(int level) const {
  std::vector<DyadicInterval> out;
  const std::int64_t n = std::int64_t{1} << level;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t m = 0; m < n; ++m) out.push_back(interval(level, m));
  return out;
}

DyadicInterval ShiftedGrid::locate(int level, std::int64_t u) const {
  const std::int64_t n = std::int64_t{1} << l_max_;
  std::int64_t r = (u - offset_units(level)) % n;
  if (r < 0) r += n;
  return interval(level, r >> (l_max_ - level));
}

DyadicInterval ShiftedGrid::k_parent(const DyadicInterval& I, int k) const {
  if (k < 0) throw std::invalid_argument("k_parent: k must be nonnegative");
  if (k > I.level) throw LevelUnderflow("k_parent: k exceeds the interval level");
  return locate(I.level - k, left_units(I));
}

std::vector<DyadicInterval> ShiftedGrid::children(const DyadicInterval& I) const {
  if (I.level >= l_max_) return {};
  const std::int64_t u = left_units(I);
  const std::int64_t h = length_units(I.level + 1);
  return {locate(I.level + 1, u), locate(I.level + 1, u + h)};
}

bool ShiftedGrid::contains(const DyadicInterval& outer, const DyadicInterval& inner) const {
  if (inner.level < outer.level) return false;
  return k_parent(inner, inner.level - outer.level) == outer;
}

std::int64_t ShiftedGrid::position_in_parent(const DyadicInterval& I, int k) const {
  const DyadicInterval P = k_parent(I, k);
  const std::int64_t n = std::int64_t{1} << l_max_;
  std::int64_t d = (left_units(I) - left_units(P)) % n;
  if (d < 0) d += n;
  return d / length_units(I.level);
}

bool ShiftedGrid::is_k_good(const DyadicInterval& I, int k) const {
  if (k < 2) throw std::invalid_argument("is_k_good: k must be >= 2");
  // Unwrapped coordinates inside the parent: I = [r, r+1) in units of l(I),
  // parent = [0, 2^k). Distance to each endpoint must be >= 2^{k-2}.
  const std::int64_t r = position_in_parent(I, k);
  const std::int64_t q = std::int64_t{1} << (k - 2);
  const std::int64_t span = std::int64_t{1} << k;
  return r >= q && span - (r + 1) >= q;
}

nlohmann::json ShiftedGrid::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (int j = 0; j <= l_max_; ++j) {
    const Dyadic off = offset(j);
    for (std::int64_t m = 0; m < (std::int64_t{1} << j); ++m)
      out.push_back({j, m, off.num, off.denominator()});
  }
  return out;
}

ShiftedGrid build_lattice(const ShiftPattern& pattern, int l_max) { return ShiftedGrid(pattern, l_max); }

DyadicInterval translate_dot(const DyadicInterval& I, std::int64_t n) {
  const std::int64_t count = std::int64_t{1} << I.level;
  std::int64_t m = (I.index + n) % count;
  if (m < 0) m += count;
  return DyadicInterval{I.level, m, I.offset};
}

GoodnessReport goodness_probability(int level, int k, int l_max, std::int64_t index, std::uint64_t tail) {
  if (k < 2) throw std::invalid_argument("goodness_probability: k must be >= 2");
  if (level < k) throw LevelUnderflow("goodness_probability: level must be >= k");
  if (l_max < level) throw std::invalid_argument("goodness_probability: L_max must be >= level");
  GoodnessReport rep;
  const int first = level - k + 1;  // bits omega_first..omega_level vary
  std::uint64_t window_mask = 0;
  for (int i = first; i <= level; ++i) window_mask |= std::uint64_t{1} << (i - 1);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << k); ++code) {
    const std::uint64_t bits = (tail & ~window_mask) | (code << (first - 1));
    const ShiftedGrid grid(ShiftPattern::from_integer(l_max, bits), l_max);
    ++rep.total_patterns;
    if (grid.is_k_good(grid.interval(level, index), k)) ++rep.good_patterns;
  }
  rep.probability = boost::rational<std::int64_t>(rep.good_patterns, rep.total_patterns);
  return rep;
}

}  // namespace zyg
