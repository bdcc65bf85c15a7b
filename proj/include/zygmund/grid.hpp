#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "zygmund/lattice.hpp"
#include "zygmund/numerics.hpp"

namespace zyg {

struct Shape {
  int l1 = 0, l2 = 0, l3 = 0;

  static Shape caps(int a, int b) { return Shape{a, b, a + b}; }
  std::int64_t n1() const { return std::int64_t{1} << l1; }
  std::int64_t n2() const { return std::int64_t{1} << l2; }
  std::int64_t n3() const { return std::int64_t{1} << l3; }
  std::int64_t n(int axis) const { return std::int64_t{1} << level(axis); }
  int level(int axis) const { return axis == 0 ? l1 : (axis == 1 ? l2 : l3); }
  std::size_t size() const { return static_cast<std::size_t>(n1() * n2() * n3()); }
  double cell_volume() const;
  std::size_t index(std::int64_t i1, std::int64_t i2, std::int64_t i3) const {
    return static_cast<std::size_t>((i1 * n2() + i2) * n3() + i3);
  }
  bool operator==(const Shape&) const = default;
};

Grids3 standard_frame(const Shape& s);
void check_frame(const Shape& s, const Grids3& frame);

// Cells covered by a lattice interval: (start + t) mod n for t < length.
struct CellSpan {
  std::int64_t start = 0;
  std::int64_t length = 0;
  std::int64_t mask = 0;
  std::int64_t cell(std::int64_t t) const { return (start + t) & mask; }
};
CellSpan cell_span(const ShiftedGrid& g, const DyadicInterval& I);

// Piecewise-constant function on the finest cells of the unit torus,
// dense row-major in (x1, x2, x3).
class GridFunction3D {
 public:
  GridFunction3D() = default;
  GridFunction3D(Shape shape, std::vector<double> values);
  static GridFunction3D zeros(Shape shape);
  static GridFunction3D constant(Shape shape, double c);
  static GridFunction3D from_cells(Shape shape, const std::function<double(std::int64_t, std::int64_t, std::int64_t)>& f);

  const Shape& shape() const { return shape_; }
  const std::vector<double>& values() const { return v_; }
  double at(std::int64_t i1, std::int64_t i2, std::int64_t i3) const { return v_[shape_.index(i1, i2, i3)]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::size_t size() const { return v_.size(); }

  GridFunction3D operator+(const GridFunction3D& o) const;
  GridFunction3D operator-(const GridFunction3D& o) const;
  GridFunction3D operator*(double c) const;
  GridFunction3D abs() const;

  double integral() const;
  double max_abs() const;

  std::vector<std::uint8_t> to_bytes() const;
  static GridFunction3D from_bytes(const std::vector<std::uint8_t>& bytes);
  void save(const std::string& path) const;
  static GridFunction3D load(const std::string& path);

 private:
  Shape shape_;
  std::vector<double> v_;
};

// <f, g> = sum f g |cell|, pairwise accumulated.
double inner(const GridFunction3D& f, const GridFunction3D& g);
double norm2(const GridFunction3D& f);
double max_abs_diff(const GridFunction3D& f, const GridFunction3D& g);

GridFunction3D random_grid(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0);

}  // namespace zyg
