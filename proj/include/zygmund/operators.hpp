#pragma once

#include <array>
#include <map>
#include <vector>

#include "zygmund/mra.hpp"
#include "zygmund/weights.hpp"

namespace zyg {

// Pointwise sup of <|f|>_R over the rectangles R of the family that contain each cell.
// Rectangles thinner than a cell along some axis average exactly like the cell-wide
// rectangle at the clamped level, so the sup runs over clamped level triples.
GridFunction3D maximal(const GridFunction3D& f, const Grids3& frame, const LatticeFamily& family);
// One-parameter dyadic maximal function along one axis.
GridFunction3D maximal_axis(const GridFunction3D& f, const Grids3& frame, int axis);
// Clamped level triples visited by `maximal`.
std::vector<std::array<int, 3>> clamped_levels(const Shape& s, const LatticeFamily& family);

// (sum over representable I in D_Z of |Delta_{I,Z} f|^2)^{1/2}.
GridFunction3D square_function_Z(const GridFunction3D& f, const Grids3& frame);

using Complexity = std::array<int, 3>;

// Levels of the rectangles K in D_{2^{-k1-k2+k3}}: (a, b, a+b+k1+k2-k3).
struct ULevels {
  int l1_lo, l1_hi;  // admissible levels of L^1
  int l2_lo, l2_hi;  // admissible levels of L^2
};
ULevels u_levels(int a, int b, const Complexity& k);

// U_{K,k} f = 1_K sum of Delta_{L,Z} f over L in D_Z with L^1 inside K^1,
// l(L^1) >= 2^{-k1} l(K^1) and 2^{-k1} l(K^2) <= 2^{k2} l(L^2) <= 2^{max(k2,k3)} l(K^2).
GridFunction3D u_block(const GridFunction3D& f, const Grids3& frame, const Rect3& K, const Complexity& k);
// (sum over representable K of |U_{K,k} f|^2)^{1/2}.
GridFunction3D u_square(const GridFunction3D& f, const Grids3& frame, const Complexity& k);
// (k1+1)(k1+max(k2,k3)+1).
int u_count_bound(const Complexity& k);

// Zygmund shifts.
enum class CoeffRule { Maximal, RandomSign, Random, Table };

struct ShiftEntry {
  Rect3 K, I, J;
  double a = 0.0;
  HVariant v1 = HVariant::HaarI;   // H_{I^1,J^1}
  HVariant v23 = HVariant::HaarI;  // H_{I^{2,3},J^{2,3}}
  int eta = 3;                     // signature of every (2,3) Haar factor
};

struct ShiftSpec {
  Complexity k{0, 0, 0};
  int form = 1;  // 1..4
  Shape shape;
  Grids3 frame;
  std::vector<ShiftEntry> entries;
  double bound_ratio() const;  // |I|/|K| = 2^{-(k1+k2+k3)}
};

class WindowTooShallow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Key of a coefficient: K by levels and indices, then the positions of I and J inside K.
struct ShiftKey {
  std::array<int, 3> level;
  std::array<std::int64_t, 3> K, I, J;
  auto operator<=>(const ShiftKey&) const = default;
};
using CoeffTable = std::map<ShiftKey, double>;

ShiftKey shift_key(const ShiftSpec& q, const ShiftEntry& e);

// Enumerates every (K, I, J) with I, J in D_Z resolved by the grid (children included)
// and I^{(k)} = J^{(k)} = K.
ShiftSpec make_shift(const Complexity& k, int form, CoeffRule rule, const Shape& s, const Grids3& frame,
                     std::uint64_t seed = 0, const CoeffTable* table = nullptr);

// Q f, or the adjoint Q^T f (unweighted pairing) when `adjoint` is set.
GridFunction3D apply_shift(const ShiftSpec& q, const GridFunction3D& f, bool adjoint = false);

// The two functions of an entry: Q f = sum a <f, phi> psi.
std::pair<GridFunction3D, GridFunction3D> shift_pair(const ShiftSpec& q, const ShiftEntry& e);

// 2^{-k1 alpha1 - k2 min(alpha23, theta) - max(k3-k1-k2, 0) theta}.
double phi(const Complexity& k, double theta, double alpha1, double alpha23);

class WeightError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// (sum |f|^p w |cell|)^{1/p} with w given per cell.
double lpw_norm(const GridFunction3D& f, double p, const GridFunction3D& w);

struct NormEstimate {
  double norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// ||T||_{L^2(w) -> L^2(w)} by power iteration on W^{-1} T^T W T.
NormEstimate weighted_operator_norm(const std::function<GridFunction3D(const GridFunction3D&)>& T,
                                    const std::function<GridFunction3D(const GridFunction3D&)>& T_adjoint,
                                    const GridFunction3D& w, std::uint64_t seed, int max_iter = 50, double tol = 1e-6);

NormEstimate shift_norm(const ShiftSpec& q, const GridFunction3D& w, std::uint64_t seed);

}  // namespace zyg
