#pragma once

#include <array>
#include <vector>

#include "zygmund/grid.hpp"

namespace zyg {

class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Haar signature eta for the (2,3) block, encoded as (eta2 << 1) | eta3.
// Cancellative signatures are 1 (h0 x h1), 2 (h1 x h0) and 3 (h1 x h1).
inline int eta2_of(int eta) { return (eta >> 1) & 1; }
inline int eta3_of(int eta) { return eta & 1; }
constexpr std::array<int, 3> kCancellativeEtas{1, 2, 3};

// 1D Haar function on the cells of one axis: h0 = |J|^{-1/2} 1_J,
// h1 = |J|^{-1/2} (1_{J_left} - 1_{J_right}).
std::vector<double> haar_1d(const ShiftedGrid& g, const DyadicInterval& J, int sig);

// Tensor product h^{s1}_{I1} x h^{s2}_{I2} x h^{s3}_{I3}.
GridFunction3D haar3(const Shape& s, const Grids3& frame, const Rect3& box, const std::array<int, 3>& sig);

// h_{I,Z} with x1 factor h1 and (2,3) factor h^eta.
GridFunction3D h_IZ(const Shape& s, const Grids3& frame, const ZygRectangle& I, int eta);

// Operators along a single axis for one interval.
enum class Op { E, Delta };
GridFunction3D axis_op(const GridFunction3D& f, const Grids3& frame, int axis, const DyadicInterval& I, Op op);
// One-parameter operators on the rectangle I2 x I3 (Delta sums over its four children).
GridFunction3D rect23_op(const GridFunction3D& f, const Grids3& frame, const DyadicInterval& I2,
                         const DyadicInterval& I3, Op op);

// X1_{I1} X23_{I^{2,3}} f for a rectangle with children at grid resolution,
// computed from the eight child sums; the result is supported on I.
GridFunction3D block_op(const GridFunction3D& f, const Grids3& frame, const Rect3& I, Op x1, Op x23);
// The same operator as eight child values, slot 4a+2b+c for child (a,b,c); 0 is the left half.
std::array<double, 8> block_values(const GridFunction3D& f, const Grids3& frame, const Rect3& I, Op x1, Op x23);
void block_op_accumulate(const GridFunction3D& f, const Grids3& frame, const Rect3& I, Op x1, Op x23,
                         double scale, std::vector<double>& out);

GridFunction3D delta_Z(const GridFunction3D& f, const Grids3& frame, const ZygRectangle& I);

// <f, h1_{I1} x h^eta_{I^{2,3}}> for eta = 1, 2, 3 (array slot eta-1).
std::array<double, 3> zyg_coeffs(const GridFunction3D& f, const Grids3& frame, const Rect3& I);

// Level operators: sums of the interval operators over one lattice level.
GridFunction3D level_E_axis(const GridFunction3D& f, const Grids3& frame, int axis, int level);
GridFunction3D level_op1(const GridFunction3D& f, const Grids3& frame, int j1, Op op);
GridFunction3D level_op23(const GridFunction3D& f, const Grids3& frame, int j2, int j3, Op op);

// Zygmund rectangles whose children are resolved by the grid: j1 < L1, j2 < L2.
std::vector<ZygRectangle> representable_zyg(const Shape& s, const Grids3& frame);
bool has_children(const Shape& s, const Rect3& r);

struct ZygCoefficient {
  Rect3 rect;
  int eta = 1;
  double value = 0.0;
};

struct ZygExpansion {
  Shape shape;
  std::vector<ZygCoefficient> coeffs;
  GridFunction3D remainder;  // f minus the sum of all Delta_{I,Z} f
};

ZygExpansion expand_Z(const GridFunction3D& f, const Grids3& frame);
GridFunction3D reconstruct(const ZygExpansion& e, const Grids3& frame);

enum class HVariant { ZeroIMinusZeroJ, ZeroJMinusZeroI, HaarI, HaarJ };
constexpr std::array<HVariant, 4> kHVariants{HVariant::ZeroIMinusZeroJ, HVariant::ZeroJMinusZeroI, HVariant::HaarI,
                                             HVariant::HaarJ};

// H_{I,J} on one axis (intervals of equal length).
struct HFunction1D {
  HVariant variant;
  DyadicInterval I, J;
  std::vector<double> values;  // on the axis cells
};
HFunction1D build_H(const ShiftedGrid& g, const DyadicInterval& I, const DyadicInterval& J, HVariant v);

// H_{I^{2,3},J^{2,3}} on the (x2,x3) plane; HaarI / HaarJ use signature eta.
struct HFunction23 {
  HVariant variant;
  std::array<DyadicInterval, 2> I, J;
  int eta = 3;
  std::vector<double> values;  // row-major (x2, x3)
};
HFunction23 build_H(const ShiftedGrid& g2, const ShiftedGrid& g3, const std::array<DyadicInterval, 2>& I,
                    const std::array<DyadicInterval, 2>& J, HVariant v, int eta);

GridFunction3D tensor(const Shape& s, const std::vector<double>& x1, const std::vector<double>& x23);

}  // namespace zyg
