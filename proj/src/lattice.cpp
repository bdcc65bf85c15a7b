#include "zygmund/lattice.hpp"

#include <algorithm>

namespace zyg {

Grids3 Grids3::standard(int l1, int l2, int l3) {
  return Grids3{{ShiftedGrid::standard(l1), ShiftedGrid::standard(l2), ShiftedGrid::standard(l3)}};
}

bool is_zygmund(const Rect3& r) { return r.axes[2].level == r.axes[0].level + r.axes[1].level; }

ZygRectangle::ZygRectangle(const Rect3& r) : r_(r) {
  if (!is_zygmund(r)) throw std::invalid_argument("ZygRectangle: level(I3) must equal level(I1)+level(I2)");
}

int lambda_exponent(const Rect3& r) { return r.axes[0].level + r.axes[1].level - r.axes[2].level; }

Dyadic lambda_class(const Rect3& r) { return Dyadic::pow2(lambda_exponent(r)); }

Dyadic ecc_z(const Rect3& r) { return Dyadic::pow2(std::abs(lambda_exponent(r))); }

ZygRectangle zygmund_hull(const Rect3& r, const Grids3& grids) {
  const int e = lambda_exponent(r);
  if (e == 0) return ZygRectangle(r);
  Rect3 out = r;
  if (e > 0) {
    // l1 l2 < l3: grow I1 to length l3/l2, i.e. level j3 - j2
    const int target = r.axes[2].level - r.axes[1].level;
    if (target < 0) throw WindowOverflow("zygmund_hull: extended first axis exceeds the window");
    out.axes[0] = grids.axis[0].k_parent(r.axes[0], r.axes[0].level - target);
  } else {
    // l1 l2 > l3: grow I3 to length l1 l2
    const int target = r.axes[0].level + r.axes[1].level;
    out.axes[2] = grids.axis[2].k_parent(r.axes[2], r.axes[2].level - target);
  }
  return ZygRectangle(out);
}

Rect3 rect_k_parent(const ZygRectangle& I, const std::array<int, 3>& k, const Grids3& grids) {
  Rect3 out;
  for (int m = 0; m < 3; ++m)
    out.axes[static_cast<std::size_t>(m)] =
        grids.axis[static_cast<std::size_t>(m)].k_parent(I[m], k[static_cast<std::size_t>(m)]);
  return out;
}

LatticeFamily LatticeFamily::parse(const std::string& s) {
  if (s == "zyg") return {Kind::Zygmund, 0};
  if (s == "sub") return {Kind::SubZygmund, 0};
  if (s == "full") return {Kind::Full, 0};
  if (s.rfind("dil:", 0) == 0) return {Kind::Dilated, std::stoi(s.substr(4))};
  throw std::invalid_argument("LatticeFamily: unknown selector '" + s + "'");
}

std::string LatticeFamily::to_string() const {
  switch (kind) {
    case Kind::Zygmund: return "zyg";
    case Kind::Dilated: return "dil:" + std::to_string(k);
    case Kind::SubZygmund: return "sub";
    case Kind::Full: return "full";
  }
  return "?";
}

bool LatticeFamily::admits(int j1, int j2, int j3) const {
  switch (kind) {
    case Kind::Zygmund: return j3 == j1 + j2;
    case Kind::Dilated: return j3 == j1 + j2 - k;
    case Kind::SubZygmund: return j3 >= j1 + j2;  // l3 <= l1 l2
    case Kind::Full: return true;
  }
  return false;
}

void for_each_rect(const LatticeFamily& family, const Grids3& grids, const std::array<int, 3>& caps,
                   const std::function<void(const Rect3&)>& fn) {
  for (int m = 0; m < 3; ++m)
    if (caps[static_cast<std::size_t>(m)] > grids.axis[static_cast<std::size_t>(m)].l_max())
      throw std::invalid_argument("enumerate: cap exceeds grid resolution");
  for (int j1 = 0; j1 <= caps[0]; ++j1)
    for (int j2 = 0; j2 <= caps[1]; ++j2)
      for (int j3 = 0; j3 <= caps[2]; ++j3) {
        if (!family.admits(j1, j2, j3)) continue;
        for (std::int64_t m1 = 0; m1 < (std::int64_t{1} << j1); ++m1)
          for (std::int64_t m2 = 0; m2 < (std::int64_t{1} << j2); ++m2)
            for (std::int64_t m3 = 0; m3 < (std::int64_t{1} << j3); ++m3)
              fn(Rect3{{grids.axis[0].interval(j1, m1), grids.axis[1].interval(j2, m2),
                        grids.axis[2].interval(j3, m3)}});
      }
}

std::vector<Rect3> enumerate(const LatticeFamily& family, const Grids3& grids, const std::array<int, 3>& caps) {
  std::vector<Rect3> out;
  for_each_rect(family, grids, caps, [&](const Rect3& r) { out.push_back(r); });
  return out;
}

}  // namespace zyg
