#pragma once

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "zygmund/grid.hpp"
#include "zygmund/numerics.hpp"

namespace zyg {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Exponents of the two-regime power weight
//   w(x) = |x1x2|^{alpha-gamma} |x3|^gamma   if |x3| <= |x1x2|,
//   w(x) = |x1x2|^{alpha-delta} |x3|^delta   otherwise.
struct PowerExponents {
  double gamma = 0.0, alpha = 0.0, delta = 0.0;
  PowerExponents scaled(double r) const { return {gamma * r, alpha * r, delta * r}; }
};

struct PowerWeightSpec {
  double gamma = 0.0, alpha = 0.0, delta = 0.0;
  double p = 2.0;
  PowerExponents exponents() const { return {gamma, alpha, delta}; }
};

double eval_power_weight(const PowerExponents& e, const std::array<double, 3>& x);
inline double eval_power_weight(const PowerWeightSpec& s, const std::array<double, 3>& x) {
  return eval_power_weight(s.exponents(), x);
}

// w^{1-p'} = w^{-1/(p-1)} as a spec with exponent p'.
PowerWeightSpec dual(const PowerWeightSpec& s);
double conjugate_exponent(double p);

// gamma in (-1, p-1), alpha in (gamma-1, gamma+p-1), delta in (alpha-(p-1), alpha+1).
bool admissible(const PowerWeightSpec& s);

// Closed axis-parallel box [lo1,hi1] x [lo2,hi2] x [lo3,hi3].
struct Box {
  std::array<double, 3> lo{}, hi{};
  double side(int m) const { return hi[static_cast<std::size_t>(m)] - lo[static_cast<std::size_t>(m)]; }
  double volume() const { return side(0) * side(1) * side(2); }
};

// max(l1 l2 / l3, l3 / (l1 l2)).
double ecc_z(const Box& b);

class WeightFunction {
 public:
  enum class Kind { Constant, Power, Grid, Custom };
  using Evaluator = std::function<double(const std::array<double, 3>&)>;

  static WeightFunction constant(double c);
  static WeightFunction power(const PowerExponents& e, double scale = 1.0);
  // Piecewise constant on the finest cells of [0,1)^3; values must be positive.
  static WeightFunction grid(GridFunction3D values);
  static WeightFunction custom(Evaluator f, std::string name);

  Kind kind() const { return kind_; }
  const PowerExponents& exponents() const { return exps_; }
  double scale() const { return scale_; }
  const GridFunction3D& grid_values() const { return *grid_; }
  const std::string& name() const { return name_; }

  double operator()(const std::array<double, 3>& x) const;
  // w^r, closed form where available.
  WeightFunction pow(double r) const;

 private:
  Kind kind_ = Kind::Constant;
  double scale_ = 1.0;
  PowerExponents exps_;
  std::shared_ptr<const GridFunction3D> grid_;
  Evaluator eval_;
  std::string name_;
};

// Whether the power weight is integrable on the box (a null-set-free analytic test).
bool power_integrable(const PowerExponents& e, const Box& b);

// <w>_R. Returns +infinity when the weight is not integrable on R.
double avg(const WeightFunction& w, const Box& R);

// <w>_R <w^{1-p'}>_R^{p-1}; +infinity if either average diverges.
double ap_product(const WeightFunction& w, double p, const Box& R);

enum class Verdict { Stabilized, Diverging, Inconclusive };
std::string to_string(Verdict v);

struct ApReport {
  double constant_estimate = 0.0;
  std::vector<std::pair<int, double>> sweep_trace;  // (depth, running sup)
  Verdict verdict = Verdict::Inconclusive;
  Box maximizer;
  std::size_t boxes = 0;
};

// Special Zygmund boxes with t1 = t2 = t3 = 2^0 scaled by 2^{a}, 2^{b}, 2^{a+b} for
// |a|,|b| <= scale_depth; each axis is [0,t] or [c,c+t] with c/t in {1,2,...,2^{depth-1}}.
std::vector<Box> special_rectangles(int depth, int scale_depth = 0);
// Boxes present at `depth` but not at depth-1.
std::vector<Box> special_rectangles_layer(int depth, int scale_depth = 0);

using RectangleLayers = std::function<std::vector<Box>(int depth)>;

// Running sup of the A_p product over the layers 1..max_depth.
// Stabilized: last ratio sup(d)/sup(d-1) < 1.05. Diverging: an infinite average or
// sup(d)/sup(d-2) >= 2 for the last depth.
ApReport apz_constant(const WeightFunction& w, double p, int max_depth, const RectangleLayers& layers);
ApReport apz_constant(const WeightFunction& w, double p, int max_depth);

// R(eps) = (0, sqrt eps)^2 x (eps, 1).
Box ecc_box(double eps);
// eps with ecc_z(R(eps)) = 2^j.
double eps_for_ecc_exponent(int j);

struct EccPoint {
  Box box;
  double ecc = 1.0;
  double product = 0.0;  // <w>_R <w^{-1}>_R
};
struct EccGrowth {
  std::vector<EccPoint> points;
  LinearFit fit;  // log2 product against log2 ecc
};
// Fit over R(eps) for the given list, p = 2.
EccGrowth ecc_growth(const WeightFunction& w, const std::vector<double>& eps, int drop = 2);
double ecc_growth_slope(const WeightFunction& w, const std::vector<double>& eps);

struct NecessaryReport {
  std::vector<double> ecc;
  std::vector<double> ratio;  // <w>^{1/p} <w^{1-p'}>^{1/p'} / ecc^theta
  double max_ratio = 0.0;
  LinearFit fit;  // log2 ratio against log2 ecc
};
NecessaryReport necessary_ecc_check(const WeightFunction& w, double p, double theta, const std::vector<Box>& boxes,
                                    int drop = 2);

// Cell averages of x -> w(x - center) on the grid cells of [0,1)^3.
GridFunction3D cell_average_weight(const WeightFunction& w, const Shape& s, const std::array<double, 3>& center);

}  // namespace zyg
