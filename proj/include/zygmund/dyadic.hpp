#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace zyg {

// num * 2^-level, kept reduced: num odd or level == 0.
struct Dyadic {
  std::int64_t num = 0;
  int level = 0;

  static Dyadic make(std::int64_t num, int level);
  static Dyadic pow2(int e);  // 2^e for any integer e
  double value() const;
  std::int64_t denominator() const;
  bool operator==(const Dyadic&) const = default;
};

bool operator<(const Dyadic& a, const Dyadic& b);

class LevelUnderflow : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Shift bits omega_1..omega_Lmax; bit i carries weight 2^-i.
class ShiftPattern {
 public:
  explicit ShiftPattern(std::vector<std::uint8_t> bits);
  static ShiftPattern zeros(int l_max);
  static ShiftPattern from_integer(int l_max, std::uint64_t code);  // bit i-1 of code is omega_i
  static ShiftPattern random(int l_max, std::uint64_t seed);

  int l_max() const { return static_cast<int>(bits_.size()); }
  int bit(int i) const { return bits_.at(static_cast<std::size_t>(i - 1)); }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

 private:
  std::vector<std::uint8_t> bits_;
};

// Interval of side 2^-level with left endpoint index*2^-level + offset (mod 1).
struct DyadicInterval {
  int level = 0;
  std::int64_t index = 0;
  Dyadic offset;

  Dyadic left() const;        // reduced into [0,1)
  Dyadic side_length() const;
  bool operator==(const DyadicInterval&) const = default;
};

// The shifted lattice D(omega) on the unit torus, levels 0..L_max.
// Integer coordinates below are in units of 2^-L_max.
class ShiftedGrid {
 public:
  ShiftedGrid(ShiftPattern pattern, int l_max);
  static ShiftedGrid standard(int l_max);

  int l_max() const { return l_max_; }
  const ShiftPattern& pattern() const { return pattern_; }

  std::int64_t offset_units(int level) const { return offsets_.at(static_cast<std::size_t>(level)); }
  Dyadic offset(int level) const;
  std::int64_t left_units(const DyadicInterval& I) const;
  std::int64_t length_units(int level) const { return std::int64_t{1} << (l_max_ - level); }

  DyadicInterval interval(int level, std::int64_t index) const;
  std::vector<DyadicInterval> level_intervals(int level) const;
  // Level-j interval containing the point u (units of 2^-L_max).
  DyadicInterval locate(int level, std::int64_t u) const;

  DyadicInterval k_parent(const DyadicInterval& I, int k) const;
  std::vector<DyadicInterval> children(const DyadicInterval& I) const;
  bool contains(const DyadicInterval& outer, const DyadicInterval& inner) const;
  // Position of I inside its k-parent, counted in multiples of l(I).
  std::int64_t position_in_parent(const DyadicInterval& I, int k) const;
  bool is_k_good(const DyadicInterval& I, int k) const;

  nlohmann::json to_json() const;

 private:
  ShiftPattern pattern_;
  int l_max_;
  std::vector<std::int64_t> offsets_;
};

ShiftedGrid build_lattice(const ShiftPattern& pattern, int l_max);

DyadicInterval translate_dot(const DyadicInterval& I, std::int64_t n);

struct GoodnessReport {
  std::int64_t total_patterns = 0;
  std::int64_t good_patterns = 0;
  boost::rational<std::int64_t> probability{0};
};

// Probability over the 2^k bits omega_{level-k+1..level} that the standard
// interval of the given level and index, shifted by omega, is k-good.
// `tail` fixes the remaining bits; they do not enter the result.
GoodnessReport goodness_probability(int level, int k, int l_max, std::int64_t index = 0,
                                    std::uint64_t tail = 0);

}  // namespace zyg
