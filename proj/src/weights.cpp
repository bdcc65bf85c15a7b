#include "zygmund/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace zyg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_minus_one(double e) { return std::fabs(e + 1.0) < 1e-12; }

// Integral of s^p over [u, v], 0 <= u <= v.
double Q(double p, double u, double v) {
  if (v <= u) return 0.0;
  if (is_minus_one(p)) return u == 0.0 ? kInf : std::log(v / u);
  if (u == 0.0 && p < -1.0) return kInf;
  return (std::pow(v, p + 1.0) - std::pow(u, p + 1.0)) / (p + 1.0);
}

// Integral of s^p log s over [u, v], 0 <= u <= v, p > -1 whenever u = 0.
double QL(double p, double u, double v) {
  if (v <= u) return 0.0;
  if (is_minus_one(p)) {
    if (u == 0.0) return -kInf;
    const double lv = std::log(v), lu = std::log(u);
    return 0.5 * (lv * lv - lu * lu);
  }
  const double q = p + 1.0;
  auto F = [&](double s) { return s == 0.0 ? 0.0 : std::pow(s, q) * (std::log(s) / q - 1.0 / (q * q)); };
  return F(v) - F(u);
}

// Integral over s in [u, v] of F(s) = int_{a3}^{b3} w(s, x3) dx3, where w depends on x1x2 = s only.
double s_integral(const PowerExponents& e, double a3, double b3, double u, double v) {
  const double al = e.alpha, ga = e.gamma, de = e.delta;
  double acc = 0.0;
  // s <= a3: all of [a3, b3] lies above the surface.
  if (a3 > 0.0 && u < a3) acc += Q(de, a3, b3) * Q(al - de, u, std::min(v, a3));
  // a3 <= s <= b3: the surface crosses the x3 range.
  const double lo = std::max(u, a3), hi = std::min(v, b3);
  if (hi > lo) {
    if (is_minus_one(ga))
      acc += QL(al + 1.0, lo, hi) - std::log(a3) * Q(al + 1.0, lo, hi);
    else
      acc += (Q(al + 1.0, lo, hi) - (a3 > 0.0 ? std::pow(a3, ga + 1.0) * Q(al - ga, lo, hi) : 0.0)) / (ga + 1.0);
    if (is_minus_one(de))
      acc += std::log(b3) * Q(al + 1.0, lo, hi) - QL(al + 1.0, lo, hi);
    else
      acc += (std::pow(b3, de + 1.0) * Q(al - de, lo, hi) - Q(al + 1.0, lo, hi)) / (de + 1.0);
  }
  // s >= b3: all of [a3, b3] lies below the surface.
  if (v > b3) acc += Q(ga, a3, b3) * Q(al - ga, std::max(u, b3), v);
  return acc;
}

// Maps [a, b] onto [0, 1] so the abscissae resolve endpoints at 0 exactly and never
// collapse onto a far-off endpoint.
double integrate_1d(const std::function<double(double)>& f, double a, double b, double tol) {
  thread_local boost::math::quadrature::tanh_sinh<double> ts;
  if (b <= a) return 0.0;
  const double h = b - a;
  return h * ts.integrate([&](double t) { return f(a + h * t); }, 0.0, 1.0, tol);
}

// Integral of the power weight over a box in the closed positive octant.
double power_integral_positive(const PowerExponents& e, const Box& b) {
  if (!power_integrable(e, b)) return kInf;
  const double a1 = b.lo[0], b1 = b.hi[0], a2 = b.lo[1], b2 = b.hi[1], a3 = b.lo[2], b3 = b.hi[2];
  auto G = [&](double x1) { return s_integral(e, a3, b3, x1 * a2, x1 * b2) / x1; };
  std::vector<double> cuts{a1, b1};
  for (double num : {a3, b3})
    for (double den : {a2, b2})
      if (den > 0.0 && num > 0.0) {
        const double c = num / den;
        if (c > a1 && c < b1) cuts.push_back(c);
      }
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) acc += integrate_1d(G, cuts[i], cuts[i + 1], 1e-11);
  return acc;
}

// Splits a box at the coordinate planes into pieces reflected into the positive octant.
std::vector<Box> positive_pieces(const Box& b) {
  std::array<std::vector<std::pair<double, double>>, 3> seg;
  for (int m = 0; m < 3; ++m) {
    const double lo = b.lo[static_cast<std::size_t>(m)], hi = b.hi[static_cast<std::size_t>(m)];
    auto& s = seg[static_cast<std::size_t>(m)];
    if (lo < 0.0) s.emplace_back(std::max(0.0, -hi), -lo);
    if (hi > 0.0) s.emplace_back(std::max(0.0, lo), hi);
  }
  std::vector<Box> out;
  for (const auto& x : seg[0])
    for (const auto& y : seg[1])
      for (const auto& z : seg[2])
        if (x.second > x.first && y.second > y.first && z.second > z.first)
          out.push_back(Box{{x.first, y.first, z.first}, {x.second, y.second, z.second}});
  return out;
}

void check_box(const Box& R) {
  for (int m = 0; m < 3; ++m)
    if (!(R.side(m) > 0.0) || !std::isfinite(R.side(m))) throw std::invalid_argument("box must have positive finite sides");
}

double grid_integral(const GridFunction3D& g, const Box& R) {
  const Shape& s = g.shape();
  std::array<std::vector<double>, 3> overlap;
  for (int m = 0; m < 3; ++m) {
    const std::int64_t n = s.n(m);
    const std::size_t mm = static_cast<std::size_t>(m);
    if (R.lo[mm] < 0.0 || R.hi[mm] > 1.0) throw DomainError("grid weight: box leaves [0,1]^3");
    overlap[mm].assign(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      const double l = static_cast<double>(i) / static_cast<double>(n), r = static_cast<double>(i + 1) / static_cast<double>(n);
      overlap[mm][static_cast<std::size_t>(i)] = std::max(0.0, std::min(r, R.hi[mm]) - std::max(l, R.lo[mm]));
    }
  }
  std::vector<double> terms;
  for (std::int64_t a = 0; a < s.n1(); ++a) {
    if (overlap[0][static_cast<std::size_t>(a)] == 0.0) continue;
    for (std::int64_t b = 0; b < s.n2(); ++b) {
      const double ab = overlap[0][static_cast<std::size_t>(a)] * overlap[1][static_cast<std::size_t>(b)];
      if (ab == 0.0) continue;
      for (std::int64_t c = 0; c < s.n3(); ++c)
        if (overlap[2][static_cast<std::size_t>(c)] > 0.0)
          terms.push_back(g.at(a, b, c) * ab * overlap[2][static_cast<std::size_t>(c)]);
    }
  }
  return pairwise_sum(terms);
}

// Axis ranges with a slab of relative width eps removed around 0.
std::vector<std::pair<double, double>> cut_axis(double lo, double hi, double eps) {
  const double e = eps * (hi - lo);
  std::vector<std::pair<double, double>> out;
  if (lo < 0.0) out.emplace_back(lo, std::min(hi, 0.0) == 0.0 ? -e : hi);
  if (hi > 0.0) out.emplace_back(std::max(lo, 0.0) == 0.0 ? e : lo, hi);
  return out;
}

double custom_integral(const WeightFunction::Evaluator& f, const Box& R, double eps) {
  double acc = 0.0;
  for (const auto& x : cut_axis(R.lo[0], R.hi[0], eps))
    for (const auto& y : cut_axis(R.lo[1], R.hi[1], eps))
      for (const auto& z : cut_axis(R.lo[2], R.hi[2], eps)) {
        auto f3 = [&](double x1, double x2) {
          return integrate_1d([&](double x3) { return f({x1, x2, x3}); }, z.first, z.second, 1e-8);
        };
        auto f2 = [&](double x1) {
          return integrate_1d([&](double x2) { return f3(x1, x2); }, y.first, y.second, 1e-8);
        };
        acc += integrate_1d(f2, x.first, x.second, 1e-8);
      }
  return acc;
}

}  // namespace

double eval_power_weight(const PowerExponents& e, const std::array<double, 3>& x) {
  const double s = std::fabs(x[0] * x[1]), t = std::fabs(x[2]);
  if (s == 0.0 || t == 0.0) throw DomainError("power weight: coordinate hyperplane");
  return t <= s ? std::pow(s, e.alpha - e.gamma) * std::pow(t, e.gamma) : std::pow(s, e.alpha - e.delta) * std::pow(t, e.delta);
}

double conjugate_exponent(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("exponent p must exceed 1");
  return p / (p - 1.0);
}

PowerWeightSpec dual(const PowerWeightSpec& s) {
  const double r = -1.0 / (s.p - 1.0);
  return {s.gamma * r, s.alpha * r, s.delta * r, conjugate_exponent(s.p)};
}

bool admissible(const PowerWeightSpec& s) {
  const double q = s.p - 1.0;
  return s.gamma > -1.0 && s.gamma < q && s.alpha > s.gamma - 1.0 && s.alpha < s.gamma + q && s.delta > s.alpha - q &&
         s.delta < s.alpha + 1.0;
}

double ecc_z(const Box& b) {
  const double r = b.side(0) * b.side(1) / b.side(2);
  return std::max(r, 1.0 / r);
}

WeightFunction WeightFunction::constant(double c) {
  if (!(c > 0.0)) throw DomainError("weight must be positive");
  WeightFunction w;
  w.kind_ = Kind::Constant;
  w.scale_ = c;
  w.name_ = "const";
  return w;
}

WeightFunction WeightFunction::power(const PowerExponents& e, double scale) {
  WeightFunction w;
  w.kind_ = Kind::Power;
  w.exps_ = e;
  w.scale_ = scale;
  w.name_ = "pw";
  return w;
}

WeightFunction WeightFunction::grid(GridFunction3D values) {
  for (double v : values.values())
    if (!(v > 0.0)) throw DomainError("grid weight: nonpositive cell");
  WeightFunction w;
  w.kind_ = Kind::Grid;
  w.grid_ = std::make_shared<const GridFunction3D>(std::move(values));
  w.name_ = "grid";
  return w;
}

WeightFunction WeightFunction::custom(Evaluator f, std::string name) {
  WeightFunction w;
  w.kind_ = Kind::Custom;
  w.eval_ = std::move(f);
  w.name_ = std::move(name);
  return w;
}

double WeightFunction::operator()(const std::array<double, 3>& x) const {
  switch (kind_) {
    case Kind::Constant: return scale_;
    case Kind::Power: return scale_ * eval_power_weight(exps_, x);
    case Kind::Grid: {
      const Shape& s = grid_->shape();
      std::array<std::int64_t, 3> i{};
      for (int m = 0; m < 3; ++m) {
        const double u = x[static_cast<std::size_t>(m)];
        if (u < 0.0 || u >= 1.0) throw DomainError("grid weight: point outside [0,1)^3");
        i[static_cast<std::size_t>(m)] = static_cast<std::int64_t>(std::floor(u * static_cast<double>(s.n(m))));
      }
      return grid_->at(i[0], i[1], i[2]);
    }
    case Kind::Custom: return eval_(x);
  }
  return 0.0;
}

WeightFunction WeightFunction::pow(double r) const {
  switch (kind_) {
    case Kind::Constant: return constant(std::pow(scale_, r));
    case Kind::Power: return power(exps_.scaled(r), std::pow(scale_, r));
    case Kind::Grid: {
      std::vector<double> v(grid_->values());
      for (auto& x : v) x = std::pow(x, r);
      return grid(GridFunction3D(grid_->shape(), std::move(v)));
    }
    case Kind::Custom: {
      auto f = eval_;
      return custom([f, r](const std::array<double, 3>& x) { return std::pow(f(x), r); }, name_ + "^r");
    }
  }
  return *this;
}

bool power_integrable(const PowerExponents& e, const Box& b) {
  const bool x3_zero = b.lo[2] <= 0.0 && b.hi[2] >= 0.0;
  const bool s_zero = (b.lo[0] <= 0.0 && b.hi[0] >= 0.0) || (b.lo[1] <= 0.0 && b.hi[1] >= 0.0);
  const double eps = 1e-12;
  if (x3_zero && !(e.gamma > -1.0 + eps)) return false;
  if (s_zero) {
    if (!x3_zero) return e.alpha - e.delta > -1.0 + eps;
    if (e.delta > -1.0 && !(e.alpha - e.delta > -1.0 + eps)) return false;
    if (!(e.alpha > -2.0 + eps)) return false;
  }
  return true;
}

double avg(const WeightFunction& w, const Box& R) {
  check_box(R);
  switch (w.kind()) {
    case WeightFunction::Kind::Constant: return w.scale();
    case WeightFunction::Kind::Power: {
      if (!power_integrable(w.exponents(), R)) return kInf;
      double acc = 0.0;
      for (const auto& piece : positive_pieces(R)) acc += power_integral_positive(w.exponents(), piece);
      return w.scale() * acc / R.volume();
    }
    case WeightFunction::Kind::Grid: return grid_integral(w.grid_values(), R) / R.volume();
    case WeightFunction::Kind::Custom: {
      const auto f = [&](const std::array<double, 3>& x) { return w(x); };
      bool touches = false;
      for (int m = 0; m < 3; ++m) touches = touches || (R.lo[static_cast<std::size_t>(m)] <= 0.0 && R.hi[static_cast<std::size_t>(m)] >= 0.0);
      if (!touches) return custom_integral(f, R, 0.0) / R.volume();
      // Cutoff test: the mass removed near the planes must shrink as the slab does.
      const double i1 = custom_integral(f, R, std::ldexp(1.0, -10));
      const double i2 = custom_integral(f, R, std::ldexp(1.0, -20));
      if (!std::isfinite(i2) || i2 - i1 > 0.5 * i1) return kInf;
      return custom_integral(f, R, std::ldexp(1.0, -40)) / R.volume();
    }
  }
  return kInf;
}

double ap_product(const WeightFunction& w, double p, const Box& R) {
  const double a = avg(w, R);
  if (!std::isfinite(a)) return kInf;
  const double b = avg(w.pow(1.0 - conjugate_exponent(p)), R);
  if (!std::isfinite(b)) return kInf;
  return a * std::pow(b, p - 1.0);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Stabilized: return "stabilized";
    case Verdict::Diverging: return "diverging";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

std::vector<double> c_ratios(int depth) {
  std::vector<double> r{0.0};
  for (int i = 0; i < depth; ++i) r.push_back(std::ldexp(1.0, i));
  return r;
}

void emit_boxes(int depth, int scale_depth, bool layer_only, std::vector<Box>& out) {
  const auto cs = c_ratios(depth);
  const double newest = std::ldexp(1.0, depth - 1);
  for (int a = -scale_depth; a <= scale_depth; ++a)
    for (int b = -scale_depth; b <= scale_depth; ++b) {
      const std::array<double, 3> t{std::ldexp(1.0, a), std::ldexp(1.0, b), std::ldexp(1.0, a + b)};
      for (double c1 : cs)
        for (double c2 : cs)
          for (double c3 : cs) {
            if (layer_only && depth > 1 && c1 != newest && c2 != newest && c3 != newest) continue;
            const std::array<double, 3> c{c1, c2, c3};
            Box bx;
            for (std::size_t m = 0; m < 3; ++m) {
              bx.lo[m] = c[m] * t[m];
              bx.hi[m] = bx.lo[m] + t[m];
            }
            out.push_back(bx);
          }
    }
}

}  // namespace

std::vector<Box> special_rectangles(int depth, int scale_depth) {
  if (depth < 1) throw std::invalid_argument("special_rectangles: depth must be >= 1");
  std::vector<Box> out;
  emit_boxes(depth, scale_depth, false, out);
  return out;
}

std::vector<Box> special_rectangles_layer(int depth, int scale_depth) {
  if (depth < 1) throw std::invalid_argument("special_rectangles: depth must be >= 1");
  std::vector<Box> out;
  emit_boxes(depth, scale_depth, true, out);
  return out;
}

ApReport apz_constant(const WeightFunction& w, double p, int max_depth, const RectangleLayers& layers) {
  if (max_depth < 1) throw std::invalid_argument("apz_constant: depth must be >= 1");
  ApReport rep;
  double sup = 0.0;
  bool infinite = false;
  for (int d = 1; d <= max_depth; ++d) {
    for (const auto& R : layers(d)) {
      const double v = ap_product(w, p, R);
      ++rep.boxes;
      if (v > sup) {
        sup = v;
        rep.maximizer = R;
      }
      if (!std::isfinite(v)) infinite = true;
    }
    rep.sweep_trace.emplace_back(d, sup);
    if (infinite) break;
  }
  rep.constant_estimate = sup;
  const auto& tr = rep.sweep_trace;
  const std::size_t n = tr.size();
  if (infinite)
    rep.verdict = Verdict::Diverging;
  else if (n >= 3 && tr[n - 1].second >= 2.0 * tr[n - 3].second)
    rep.verdict = Verdict::Diverging;
  else if (n >= 2 && tr[n - 1].second < 1.05 * tr[n - 2].second)
    rep.verdict = Verdict::Stabilized;
  else
    rep.verdict = Verdict::Inconclusive;
  return rep;
}

ApReport apz_constant(const WeightFunction& w, double p, int max_depth) {
  return apz_constant(w, p, max_depth, [](int d) { return special_rectangles_layer(d); });
}

Box ecc_box(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("ecc_box: eps must lie in (0,1)");
  const double r = std::sqrt(eps);
  return Box{{0.0, 0.0, eps}, {r, r, 1.0}};
}

double eps_for_ecc_exponent(int j) { return 1.0 / (std::ldexp(1.0, j) + 1.0); }

EccGrowth ecc_growth(const WeightFunction& w, const std::vector<double>& eps, int drop) {
  EccGrowth out;
  const WeightFunction inv = w.pow(-1.0);
  std::vector<double> x, y;
  for (double e : eps) {
    EccPoint pt;
    pt.box = ecc_box(e);
    pt.ecc = ecc_z(pt.box);
    pt.product = avg(w, pt.box) * avg(inv, pt.box);
    if (!std::isfinite(pt.product)) throw DomainError("ecc_growth: divergent average");
    x.push_back(pt.ecc);
    y.push_back(pt.product);
    out.points.push_back(pt);
  }
  out.fit = loglog_fit(x, y, drop);
  return out;
}

double ecc_growth_slope(const WeightFunction& w, const std::vector<double>& eps) { return ecc_growth(w, eps).fit.slope; }

NecessaryReport necessary_ecc_check(const WeightFunction& w, double p, double theta, const std::vector<Box>& boxes,
                                    int drop) {
  NecessaryReport rep;
  const double pp = conjugate_exponent(p);
  const WeightFunction sigma = w.pow(1.0 - pp);
  for (const auto& R : boxes) {
    const double a = avg(w, R), b = avg(sigma, R);
    if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("necessary_ecc_check: divergent average");
    const double e = ecc_z(R);
    const double r = std::pow(a, 1.0 / p) * std::pow(b, 1.0 / pp) / std::pow(e, theta);
    rep.ecc.push_back(e);
    rep.ratio.push_back(r);
    rep.max_ratio = std::max(rep.max_ratio, r);
  }
  std::vector<double> distinct(rep.ecc);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() >= static_cast<std::size_t>(drop) + 2) rep.fit = loglog_fit(rep.ecc, rep.ratio, drop);
  return rep;
}

GridFunction3D cell_average_weight(const WeightFunction& w, const Shape& s, const std::array<double, 3>& center) {
  std::vector<double> v(s.size());
  const double h1 = 1.0 / static_cast<double>(s.n1()), h2 = 1.0 / static_cast<double>(s.n2()),
               h3 = 1.0 / static_cast<double>(s.n3());
  for (std::int64_t a = 0; a < s.n1(); ++a)
    for (std::int64_t b = 0; b < s.n2(); ++b)
      for (std::int64_t c = 0; c < s.n3(); ++c) {
        const Box R{{static_cast<double>(a) * h1 - center[0], static_cast<double>(b) * h2 - center[1],
                     static_cast<double>(c) * h3 - center[2]},
                    {static_cast<double>(a + 1) * h1 - center[0], static_cast<double>(b + 1) * h2 - center[1],
                     static_cast<double>(c + 1) * h3 - center[2]}};
        const double val = avg(w, R);
        if (!std::isfinite(val) || !(val > 0.0)) throw DomainError("cell_average_weight: weight not locally integrable");
        v[s.index(a, b, c)] = val;
      }
  return GridFunction3D(s, std::move(v));
}

}  // namespace zyg
