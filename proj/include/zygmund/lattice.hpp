#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "zygmund/dyadic.hpp"

namespace zyg {

// One shifted grid per axis.
struct Grids3 {
  std::array<ShiftedGrid, 3> axis;
  static Grids3 standard(int l1, int l2, int l3);
  static Grids3 standard_caps(int l1, int l2) { return standard(l1, l2, l1 + l2); }
};

struct Rect3 {
  std::array<DyadicInterval, 3> axes;
  std::array<int, 3> levels() const { return {axes[0].level, axes[1].level, axes[2].level}; }
  Dyadic volume() const { return Dyadic::make(1, axes[0].level + axes[1].level + axes[2].level); }
  bool operator==(const Rect3&) const = default;
};

// Rect3 with level(I3) = level(I1) + level(I2).
class ZygRectangle {
 public:
  explicit ZygRectangle(const Rect3& r);
  const Rect3& rect() const { return r_; }
  const DyadicInterval& operator[](int m) const { return r_.axes[static_cast<std::size_t>(m)]; }
  std::array<int, 3> levels() const { return r_.levels(); }
  bool operator==(const ZygRectangle&) const = default;

 private:
  Rect3 r_;
};

bool is_zygmund(const Rect3& r);

// lambda = l(I3) / (l(I1) l(I2)) = 2^{j1+j2-j3}
Dyadic lambda_class(const Rect3& r);
int lambda_exponent(const Rect3& r);
Dyadic ecc_z(const Rect3& r);

class WindowOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Smallest Zygmund rectangle of the same grids containing r whose volume is
// ecc_z(r)|r|: the short axis (I1 when lambda > 1, I3 when lambda < 1) is
// replaced by its dyadic ancestor of the required length.
ZygRectangle zygmund_hull(const Rect3& r, const Grids3& grids);

Rect3 rect_k_parent(const ZygRectangle& I, const std::array<int, 3>& k, const Grids3& grids);

struct LatticeFamily {
  enum class Kind { Zygmund, Dilated, SubZygmund, Full };
  Kind kind = Kind::Zygmund;
  int k = 0;  // Dilated: lambda = 2^k

  static LatticeFamily parse(const std::string& s);
  std::string to_string() const;
  // Whether level triple (j1,j2,j3) belongs to the family.
  bool admits(int j1, int j2, int j3) const;
};

// Level caps (c1,c2,c3) bound each axis level inclusively.
void for_each_rect(const LatticeFamily& family, const Grids3& grids, const std::array<int, 3>& caps,
                   const std::function<void(const Rect3&)>& fn);
std::vector<Rect3> enumerate(const LatticeFamily& family, const Grids3& grids, const std::array<int, 3>& caps);

}  // namespace zyg
