#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zygmund/grid.hpp"
#include "zygmund/weights.hpp"

namespace zyg {

using Point3 = std::array<double, 3>;

// (|x1x2|/|x3| + |x3|/|x1x2|)^{-theta}; requires x1x2x3 != 0.
double D_theta(const Point3& x, double theta);
// D_1(x) log(|x1x2|/|x3| + |x3|/|x1x2|).
double D_log(const Point3& x);
// sup of D_log / D_{1-gamma} over a log-spaced mesh of |x1x2|/|x3| in [2^-range, 2^range].
double dlog_domination_constant(double gamma, int mesh_points = 4001, double range = 60.0);

// phi(x) = A (2 psi(x/2) - psi(x/4)), psi(u) = exp(-1/(1-u^2)) on |u| < 1.
// Even, supported in [-4,4], integral zero, min over [-1,1] equal to 1.
class Bump {
 public:
  static const Bump& standard();
  double A() const { return A_; }
  double operator()(double x) const;
  // Integral of phi over [lo, hi].
  double integral(double lo, double hi) const;
  // Integral of phi(s) g(s) over [lo, hi] for a smooth weight g.
  double integral(double lo, double hi, const std::function<double(double)>& g) const;

 private:
  Bump();
  double A_;
  std::array<double, 64> pieces_{};  // integrals over the pieces of width 1/8
};

enum class DecayMode { Theta, Log };

struct KernelSpec {
  enum class Form { NagelWainger, BumpProduct, Custom };
  using Evaluator = std::function<double(const Point3&)>;

  Form form = Form::NagelWainger;
  double theta = 1.0, alpha1 = 1.0, alpha23 = 1.0;
  DecayMode decay = DecayMode::Theta;
  Point3 t{1.0, 1.0, 1.0};  // bump scales
  Evaluator custom;
  std::array<bool, 3> odd{false, false, false};  // K changes sign when x_m does
  std::string name;

  std::string describe() const;
};

KernelSpec nagel_wainger();
KernelSpec build_bump(const Point3& t, double theta);
KernelSpec custom_kernel(KernelSpec::Evaluator f, std::string name, double theta, std::array<bool, 3> odd = {});

// K(x) off the singular set {x1x2x3 = 0}; DomainError on it.
double kernel_eval(const KernelSpec& k, const Point3& x);
// K(x - y).
double kernel_eval(const KernelSpec& k, const Point3& x, const Point3& y);
// The decay factor selected by the spec.
double decay_factor(const KernelSpec& k, const Point3& x);

enum class Condition { Size, Mixed1, Mixed23, Holder, R, C1a, C1j, C2b, PartialSize, PartialHolder, WBP };
Condition parse_condition(const std::string& s);
std::string to_string(Condition c);
std::vector<Condition> all_conditions();

struct SamplePlan {
  int samples = 10000;
  std::uint64_t seed = 1;
  double lo_exp = -8.0, hi_exp = 8.0;
};

struct ConditionReport {
  Condition condition = Condition::Size;
  double sup_ratio = 0.0;
  std::vector<double> maximizer;  // the sample attaining sup_ratio
  int samples = 0;
  int quadrature_failures = 0;
  nlohmann::json to_json() const;
};

// sup over the plan of |LHS| / RHS with constant one.
ConditionReport check_condition(const KernelSpec& k, Condition c, const SamplePlan& plan);

// One axis of a folded integration domain or a fixed coordinate.
struct AxisDomain {
  enum class Kind { Point, Annulus, Tent };
  Kind kind = Kind::Point;
  double x = 0.0;          // Point: coordinate
  double h = 0.0;          // Point: increment of the difference operator
  int diff = -1;           // Point: -1 plain value, 0 or 1 the exponent a of a K(x+h) - K(x)
  double lo = 0.0, hi = 0.0;  // Annulus: lo < |s| < hi; Tent: weight (hi - |s|)_+ on |s| < hi
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool ok = true;
};

// Integral of the product of per-axis difference operators applied to K over the folded domains.
QuadResult integrate_kernel(const KernelSpec& k, const std::array<AxisDomain, 3>& axes, double tol = 1e-10);

// K_{I^1}(u2, u3) = double integral over I^1 x I^1 of K(x1 - y1, u2, u3).
QuadResult partial_kernel(const KernelSpec& k, double len1, double u2, double u3, double tol = 1e-10);

// <T 1_I, 1_I> for a box with the given side lengths.
QuadResult self_pairing(const KernelSpec& k, const Point3& sides, double tol = 1e-10);

struct Truncation {
  Point3 eps{0.0, 0.0, 0.0};
  Point3 N{1e300, 1e300, 1e300};
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Linear operator on grid functions: a translation-invariant stencil or a dense matrix.
class DiscreteOperator {
 public:
  static DiscreteOperator dense(Shape s, std::vector<double> matrix, nlohmann::json provenance);
  static DiscreteOperator identity(Shape s);

  const Shape& shape() const { return shape_; }
  bool is_dense() const { return dense_; }
  // Coefficient c(cell, cell') with (Tf)(cell) = sum c f(cell') |cell'|.
  double entry(std::size_t cell, std::size_t cell2) const;
  GridFunction3D apply(const GridFunction3D& f) const;
  GridFunction3D apply_adjoint(const GridFunction3D& f) const;
  const nlohmann::json& provenance() const { return provenance_; }
  const std::array<double, 3>& effective_eps() const { return eff_eps_; }

  void save(const std::string& stem) const;  // stem.bin and stem.json
  static DiscreteOperator load(const std::string& stem);

 private:
  friend DiscreteOperator discretize(const KernelSpec&, const Shape&, const Truncation&, int);
  friend DiscreteOperator stencil_from(const Shape&, std::vector<double>, nlohmann::json);
  Shape shape_;
  bool dense_ = false;
  std::vector<double> data_;  // dense: row-major N x N; stencil: (2n1-1)(2n2-1)(2n3-1) by difference
  nlohmann::json provenance_;
  std::array<double, 3> eff_eps_{0.0, 0.0, 0.0};
  std::size_t stencil_index(std::int64_t d1, std::int64_t d2, std::int64_t d3) const;
};

// Convolution by the truncated kernel on the window [0,1)^3, entries are cell-pair averages of K.
// Pieces of the difference tents that touch the singular planes are refined geometrically `grading` times.
DiscreteOperator discretize(const KernelSpec& k, const Shape& s, const Truncation& tr, int grading = 12);
// Translation-invariant operator from its difference stencil.
DiscreteOperator stencil_from(const Shape& s, std::vector<double> stencil, nlohmann::json provenance);

// <T f, g>.
double pairing(const DiscreteOperator& T, const GridFunction3D& f, const GridFunction3D& g);

// Continuous, compactly supported, piecewise linear function.
struct PiecewiseLinear {
  std::vector<double> x, y;  // breakpoints ascending; zero outside [x.front(), x.back()]
  double operator()(double s) const;
};

struct StepPiece {
  double lo, hi, value;
};
// c(s) = integral of b(x) a(x - s) dx for step functions a, b.
PiecewiseLinear correlation(const std::vector<StepPiece>& b, const std::vector<StepPiece>& a);

// integral of K(s) c1(s1) c2(s2) c3(s3) ds against the continuous kernel.
QuadResult continuous_pairing(const KernelSpec& k, const std::array<PiecewiseLinear, 3>& c, double tol = 1e-10);

struct LowerBoundReport {
  double min_margin = 0.0;  // min over sampled points of Phi*f - <f>_R
  std::size_t points = 0;
  bool holds(double tol) const { return min_margin >= -tol; }
};
// Phi*f against <f>_R at the cell centres of R, for f >= 0 given on a grid subdividing R.
LowerBoundReport convolution_lower_bound(const Box& R, const GridFunction3D& f);

}  // namespace zyg
