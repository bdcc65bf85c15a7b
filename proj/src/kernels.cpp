#include "zygmund/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

namespace zyg {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
constexpr unsigned kDepth = 15;
constexpr double kFailRel = 1e-6;

bool quad_ok(double value, double err, double l1) {
  return std::isfinite(value) && std::isfinite(err) && err <= kFailRel * l1 + 1e-300;
}

double psi(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }
double bump_raw(double x) { return 2.0 * psi(x / 2.0) - psi(x / 4.0); }

constexpr int kPieces = 64;  // pieces of width 1/8 on [-4, 4]
constexpr double kPieceWidth = 8.0 / kPieces;

// Composite 20-point Gauss-Legendre over [lo, hi] on the fixed piece grid.
template <class F>
double composite_gauss(F&& f, double lo, double hi, const std::array<double, kPieces>* cached) {
  using G = boost::math::quadrature::gauss<double, 20>;
  const double a = std::max(lo, -4.0), b = std::min(hi, 4.0);
  if (!(b > a)) return 0.0;
  auto first = static_cast<int>(std::floor((a + 4.0) / kPieceWidth));
  auto last = static_cast<int>(std::ceil((b + 4.0) / kPieceWidth));
  first = std::clamp(first, 0, kPieces - 1);
  last = std::clamp(last, first + 1, kPieces);
  double total = 0.0;
  for (int p = first; p < last; ++p) {
    const double p0 = -4.0 + p * kPieceWidth, p1 = p0 + kPieceWidth;
    const double u0 = std::max(a, p0), u1 = std::min(b, p1);
    if (!(u1 > u0)) continue;
    if (cached != nullptr && u0 == p0 && u1 == p1)
      total += (*cached)[static_cast<std::size_t>(p)];
    else
      total += G::integrate(f, u0, u1);
  }
  return total;
}

void check_param(double v, const char* what) {
  if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in (0,1]");
}

}  // namespace

double D_theta(const Point3& x, double theta) {
  const double p = std::abs(x[0] * x[1]), q = std::abs(x[2]);
  if (p == 0.0 || q == 0.0) throw DomainError("D_theta: point on the singular set");
  const double r = p / q;
  return std::pow(r + 1.0 / r, -theta);
}

double D_log(const Point3& x) {
  const double p = std::abs(x[0] * x[1]), q = std::abs(x[2]);
  if (p == 0.0 || q == 0.0) throw DomainError("D_log: point on the singular set");
  const double r = p / q, u = r + 1.0 / r;
  return std::log(u) / u;
}

double dlog_domination_constant(double gamma, int mesh_points, double range) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
  if (mesh_points < 2) throw std::invalid_argument("mesh needs two points");
  double best = 0.0;
  for (int i = 0; i < mesh_points; ++i) {
    const double e = -range + 2.0 * range * i / (mesh_points - 1);
    const double r = std::exp2(e), u = r + 1.0 / r;
    best = std::max(best, std::log(u) * std::pow(u, -gamma));
  }
  return best;
}

Bump::Bump() {
  // phi is even, so the minimum over [-1,1] is the minimum over [0,1].
  const auto found = boost::math::tools::brent_find_minima(bump_raw, 0.0, 1.0, std::numeric_limits<double>::digits);
  const double m = std::min({found.second, bump_raw(0.0), bump_raw(1.0)});
  A_ = 1.0 / m;
  for (int p = 0; p < kPieces; ++p) {
    const double p0 = -4.0 + p * kPieceWidth;
    pieces_[static_cast<std::size_t>(p)] =
        boost::math::quadrature::gauss<double, 20>::integrate([this](double s) { return (*this)(s); }, p0, p0 + kPieceWidth);
  }
}

const Bump& Bump::standard() {
  static const Bump b;
  return b;
}

double Bump::operator()(double x) const { return A_ * bump_raw(x); }

double Bump::integral(double lo, double hi) const {
  if (hi < lo) return -integral(hi, lo);
  return composite_gauss([this](double s) { return (*this)(s); }, lo, hi, &pieces_);
}

double Bump::integral(double lo, double hi, const std::function<double(double)>& g) const {
  if (hi < lo) return -integral(hi, lo, g);
  return composite_gauss([&](double s) { return (*this)(s) * g(s); }, lo, hi, nullptr);
}

std::string KernelSpec::describe() const {
  std::ostringstream o;
  o << name << "(theta=" << theta << ",alpha1=" << alpha1 << ",alpha23=" << alpha23
    << ",decay=" << (decay == DecayMode::Theta ? "theta" : "log");
  if (form == Form::BumpProduct) o << ",t=" << t[0] << "x" << t[1] << "x" << t[2];
  o << ")";
  return o.str();
}

KernelSpec nagel_wainger() {
  KernelSpec k;
  k.form = KernelSpec::Form::NagelWainger;
  k.odd = {true, true, false};
  k.name = "nagel-wainger";
  return k;
}

KernelSpec build_bump(const Point3& t, double theta) {
  for (double v : t)
    if (!(v > 0.0)) throw std::invalid_argument("bump scales must be positive");
  check_param(theta, "theta");
  KernelSpec k;
  k.form = KernelSpec::Form::BumpProduct;
  k.t = t;
  k.theta = theta;
  k.name = "bump";
  return k;
}

KernelSpec custom_kernel(KernelSpec::Evaluator f, std::string name, double theta, std::array<bool, 3> odd) {
  if (!f) throw std::invalid_argument("custom kernel needs an evaluator");
  check_param(theta, "theta");
  KernelSpec k;
  k.form = KernelSpec::Form::Custom;
  k.custom = std::move(f);
  k.theta = theta;
  k.odd = odd;
  k.name = std::move(name);
  return k;
}

double kernel_eval(const KernelSpec& k, const Point3& x) {
  if (x[0] == 0.0 || x[1] == 0.0 || x[2] == 0.0) throw DomainError("kernel evaluated on the singular set");
  switch (k.form) {
    case KernelSpec::Form::NagelWainger: {
      const double p = x[0] * x[1];
      return (p > 0.0 ? 1.0 : -1.0) / (p * p + x[2] * x[2]);
    }
    case KernelSpec::Form::BumpProduct: {
      const Bump& b = Bump::standard();
      double v = D_theta(k.t, k.theta);
      for (int m = 0; m < 3; ++m) v *= b(x[m] / k.t[m]) / k.t[m];
      return v;
    }
    case KernelSpec::Form::Custom: return k.custom(x);
  }
  return 0.0;
}

double kernel_eval(const KernelSpec& k, const Point3& x, const Point3& y) {
  return kernel_eval(k, Point3{x[0] - y[0], x[1] - y[1], x[2] - y[2]});
}

double decay_factor(const KernelSpec& k, const Point3& x) {
  return k.decay == DecayMode::Theta ? D_theta(x, k.theta) : D_log(x);
}

// ---------------------------------------------------------------------------------------------
// Conditions

namespace {

struct ConditionName {
  Condition c;
  const char* name;
};
constexpr ConditionName kNames[] = {
    {Condition::Size, "size"},          {Condition::Mixed1, "mixed1"},
    {Condition::Mixed23, "mixed23"},    {Condition::Holder, "holder"},
    {Condition::R, "R"},                {Condition::C1a, "C1a"},
    {Condition::C1j, "C1j"},            {Condition::C2b, "C2b"},
    {Condition::PartialSize, "partial-size"}, {Condition::PartialHolder, "partial-holder"},
    {Condition::WBP, "wbp"},
};

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace

Condition parse_condition(const std::string& s) {
  const std::string key = lower(s);
  for (const auto& n : kNames)
    if (lower(n.name) == key) return n.c;
  if (key == "mixed-1") return Condition::Mixed1;
  if (key == "mixed-23") return Condition::Mixed23;
  throw std::invalid_argument("unknown kernel condition: " + s);
}

std::string to_string(Condition c) {
  for (const auto& n : kNames)
    if (n.c == c) return n.name;
  return "?";
}

std::vector<Condition> all_conditions() {
  std::vector<Condition> out;
  for (const auto& n : kNames) out.push_back(n.c);
  return out;
}

nlohmann::json ConditionReport::to_json() const {
  return {{"condition", to_string(condition)},
          {"sup_ratio", sup_ratio},
          {"maximizer", maximizer},
          {"samples", samples},
          {"quadrature_failures", quadrature_failures}};
}

// ---------------------------------------------------------------------------------------------
// Integrals over folded domains

namespace {

struct Term {
  double x, coef;
};

std::vector<Term> point_terms(const AxisDomain& a) {
  if (a.diff < 0) return {{a.x, 1.0}};
  std::vector<Term> t;
  if (a.diff != 0) t.push_back({a.x + a.h, static_cast<double>(a.diff)});
  t.push_back({a.x, -1.0});
  return t;
}

class FoldedIntegrand {
 public:
  FoldedIntegrand(const KernelSpec& k, const std::array<AxisDomain, 3>& axes) : k_(k), axes_(axes) {
    for (int m = 0; m < 3; ++m) {
      if (axes[m].kind == AxisDomain::Kind::Point) {
        terms_[m] = point_terms(axes[m]);
      } else {
        integrated_.push_back(m);
        terms_[m] = {{0.0, 1.0}};
      }
    }
  }
  const std::vector<int>& integrated() const { return integrated_; }

  // Sum over sign patterns of the integrated axes, first integrated axis toggling fastest.
  double operator()(const Point3& s) const {
    const std::size_t n = integrated_.size();
    double fold = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      Point3 base{};
      for (std::size_t d = 0; d < n; ++d) {
        const int m = integrated_[d];
        base[m] = (mask >> d & 1U) ? -s[m] : s[m];
      }
      double v = 0.0;
      for (const auto& t0 : terms_[0])
        for (const auto& t1 : terms_[1])
          for (const auto& t2 : terms_[2]) {
            const double c = t0.coef * t1.coef * t2.coef;
            if (c == 0.0) continue;
            Point3 p = base;
            if (axes_[0].kind == AxisDomain::Kind::Point) p[0] = t0.x;
            if (axes_[1].kind == AxisDomain::Kind::Point) p[1] = t1.x;
            if (axes_[2].kind == AxisDomain::Kind::Point) p[2] = t2.x;
            v += c * kernel_eval(k_, p);
          }
      fold += v;
    }
    double w = 1.0;
    for (int m : integrated_)
      if (axes_[m].kind == AxisDomain::Kind::Tent) w *= axes_[m].hi - s[m];
    return fold * w;
  }

 private:
  const KernelSpec& k_;
  const std::array<AxisDomain, 3>& axes_;
  std::vector<int> integrated_;
  std::array<std::vector<Term>, 3> terms_;
};

double nested(const FoldedIntegrand& g, const std::array<AxisDomain, 3>& axes, std::size_t d, Point3& s, double tol,
              bool& ok, double& err_out) {
  const auto& idx = g.integrated();
  if (d == idx.size()) return g(s);
  const int m = idx[d];
  const AxisDomain& a = axes[m];
  double err = 0.0, l1 = 0.0, v = 0.0;
  if (a.kind == AxisDomain::Kind::Annulus) {
    auto f = [&](double u) {
      Point3 t = s;
      t[m] = std::exp(u);
      double e = 0.0;
      return nested(g, axes, d + 1, t, tol, ok, e) * t[m];
    };
    v = GK::integrate(f, std::log(a.lo), std::log(a.hi), kDepth, tol, &err, &l1);
  } else {
    auto f = [&](double u) {
      Point3 t = s;
      t[m] = u;
      double e = 0.0;
      return nested(g, axes, d + 1, t, tol, ok, e);
    };
    v = GK::integrate(f, 0.0, a.hi, kDepth, tol, &err, &l1);
  }
  if (!quad_ok(v, err, l1)) ok = false;
  err_out = err;
  return v;
}

double bump_axis_factor(const Bump& b, const AxisDomain& a, double t) {
  auto phi_t = [&](double x) { return b(x / t) / t; };
  switch (a.kind) {
    case AxisDomain::Kind::Point:
      if (a.diff < 0) return phi_t(a.x);
      return a.diff * phi_t(a.x + a.h) - phi_t(a.x);
    case AxisDomain::Kind::Annulus: return 2.0 * b.integral(a.lo / t, a.hi / t);
    case AxisDomain::Kind::Tent: {
      const double hi = a.hi;
      return 2.0 * b.integral(0.0, hi / t, [&](double u) { return hi - t * u; });
    }
  }
  return 0.0;
}

void check_axes(const std::array<AxisDomain, 3>& axes) {
  for (const auto& a : axes) {
    if (a.kind == AxisDomain::Kind::Annulus && !(a.lo > 0.0 && a.hi > a.lo))
      throw std::invalid_argument("annulus needs 0 < lo < hi");
    if (a.kind == AxisDomain::Kind::Tent && !(a.hi > 0.0)) throw std::invalid_argument("tent needs hi > 0");
    if (a.kind == AxisDomain::Kind::Point && a.diff > 1) throw std::invalid_argument("difference exponent is 0 or 1");
  }
}

}  // namespace

QuadResult integrate_kernel(const KernelSpec& k, const std::array<AxisDomain, 3>& axes, double tol) {
  check_axes(axes);
  if (k.form == KernelSpec::Form::BumpProduct) {
    const Bump& b = Bump::standard();
    double v = D_theta(k.t, k.theta);
    for (int m = 0; m < 3; ++m) v *= bump_axis_factor(b, axes[m], k.t[m]);
    return {v, std::abs(v) * 1e-13, std::isfinite(v)};
  }
  FoldedIntegrand g(k, axes);
  Point3 s{};
  bool ok = true;
  double err = 0.0;
  const double v = nested(g, axes, 0, s, tol, ok, err);
  return {v, err, ok && std::isfinite(v)};
}

QuadResult partial_kernel(const KernelSpec& k, double len1, double u2, double u3, double tol) {
  std::array<AxisDomain, 3> axes;
  axes[0].kind = AxisDomain::Kind::Tent;
  axes[0].hi = len1;
  axes[1].x = u2;
  axes[2].x = u3;
  return integrate_kernel(k, axes, tol);
}

QuadResult self_pairing(const KernelSpec& k, const Point3& sides, double tol) {
  std::array<AxisDomain, 3> axes;
  for (int m = 0; m < 3; ++m) {
    axes[m].kind = AxisDomain::Kind::Tent;
    axes[m].hi = sides[m];
  }
  return integrate_kernel(k, axes, tol);
}

// ---------------------------------------------------------------------------------------------
// Sampled condition checks

namespace {

struct Eval {
  double ratio = 0.0;
  bool ok = true;
};

double rel(double h, double x) { return std::abs(h) / std::abs(x); }

double size_rhs(const KernelSpec& k, const Point3& x) {
  return decay_factor(k, x) / std::abs(x[0] * x[1] * x[2]);
}

// Factor |h|^{a alpha} / |x|^{1 + a alpha}.
double reg_factor(int a, double h, double x, double alpha) {
  return std::pow(std::abs(h), a * alpha) / std::pow(std::abs(x), 1.0 + a * alpha);
}

Eval evaluate(const KernelSpec& k, Condition c, const std::vector<double>& p) {
  const double tol = 1e-10;
  auto K = [&](double a, double b, double d) { return kernel_eval(k, Point3{a, b, d}); };
  switch (c) {
    case Condition::Size: {
      const Point3 x{p[0], p[1], p[2]};
      return {std::abs(K(p[0], p[1], p[2])) / size_rhs(k, x)};
    }
    case Condition::Mixed1: {
      const Point3 x{p[0], p[1], p[2]};
      const double h1 = p[3];
      const double lhs = std::abs(K(p[0] + h1, p[1], p[2]) - K(p[0], p[1], p[2]));
      return {lhs / (std::pow(rel(h1, p[0]), k.alpha1) * size_rhs(k, x))};
    }
    case Condition::Mixed23: {
      const Point3 x{p[0], p[1], p[2]};
      const double h2 = p[4], h3 = p[5];
      const double lhs = std::abs(K(p[0], p[1] + h2, p[2] + h3) - K(p[0], p[1], p[2]));
      return {lhs / (std::pow(rel(h2, p[1]) + rel(h3, p[2]), k.alpha23) * size_rhs(k, x))};
    }
    case Condition::Holder: {
      const Point3 x{p[0], p[1], p[2]};
      const double h1 = p[3], h2 = p[4], h3 = p[5];
      const double lhs = std::abs(K(p[0] + h1, p[1] + h2, p[2] + h3) - K(p[0] + h1, p[1], p[2]) -
                                  K(p[0], p[1] + h2, p[2] + h3) + K(p[0], p[1], p[2]));
      const double rhs = std::pow(rel(h1, p[0]), k.alpha1) * std::pow(rel(h2, p[1]) + rel(h3, p[2]), k.alpha23) *
                         size_rhs(k, x);
      return {lhs / rhs};
    }
    case Condition::R: {
      const Point3 x{p[0], p[1], p[2]};
      double best = 0.0;
      for (int mask = 0; mask < 8; ++mask) {
        const int a[3] = {mask & 1, mask >> 1 & 1, mask >> 2 & 1};
        if (a[0] + a[1] + a[2] > 2) continue;
        // Product of (a_i T_i - I) applied to K.
        double lhs = 0.0;
        for (int sub = 0; sub < 8; ++sub) {
          double coef = 1.0;
          Point3 q = x;
          bool skip = false;
          for (int m = 0; m < 3; ++m) {
            if (sub >> m & 1) {
              if (a[m] == 0) {
                skip = true;
                break;
              }
              q[m] += p[3 + m];
            } else {
              coef = -coef;
            }
          }
          if (!skip) lhs += coef * kernel_eval(k, q);
        }
        double rhs = decay_factor(k, x);
        for (int m = 0; m < 3; ++m) rhs *= reg_factor(a[m], p[3 + m], x[m], k.alpha1);
        best = std::max(best, std::abs(lhs) / rhs);
      }
      return {best};
    }
    case Condition::C1a: {
      std::array<AxisDomain, 3> axes;
      for (int m = 0; m < 3; ++m) {
        axes[m].kind = AxisDomain::Kind::Annulus;
        axes[m].lo = p[m];
        axes[m].hi = p[3 + m];
      }
      const auto q = integrate_kernel(k, axes, tol);
      return {std::abs(q.value), q.ok};
    }
    case Condition::C1j: {
      Eval out;
      for (int j = 0; j < 3; ++j)
        for (int a = 0; a <= 1; ++a) {
          std::array<AxisDomain, 3> axes;
          for (int m = 0; m < 3; ++m) {
            if (m == j) {
              axes[m].x = p[6 + m];
              axes[m].h = p[9 + m];
              axes[m].diff = a;
            } else {
              axes[m].kind = AxisDomain::Kind::Annulus;
              axes[m].lo = p[m];
              axes[m].hi = p[3 + m];
            }
          }
          const auto q = integrate_kernel(k, axes, tol);
          out.ok = out.ok && q.ok;
          out.ratio = std::max(out.ratio, std::abs(q.value) / reg_factor(a, p[9 + j], p[6 + j], k.alpha1));
        }
      return out;
    }
    case Condition::C2b: {
      Eval out;
      const int as[3][2] = {{0, 0}, {1, 0}, {0, 1}};
      for (const auto& a : as) {
        std::array<AxisDomain, 3> axes;
        axes[0].kind = AxisDomain::Kind::Annulus;
        axes[0].lo = p[0];
        axes[0].hi = p[1];
        for (int m = 1; m < 3; ++m) {
          axes[m].x = p[1 + m];
          axes[m].h = p[3 + m];
          axes[m].diff = a[m - 1];
        }
        const auto q = integrate_kernel(k, axes, tol);
        double rhs = decay_factor(k, Point3{p[0], p[2], p[3]}) + decay_factor(k, Point3{p[1], p[2], p[3]});
        for (int m = 1; m < 3; ++m) rhs *= reg_factor(a[m - 1], p[3 + m], p[1 + m], k.alpha1);
        out.ok = out.ok && q.ok;
        out.ratio = std::max(out.ratio, std::abs(q.value) / rhs);
      }
      return out;
    }
    case Condition::PartialSize: {
      const auto q = partial_kernel(k, p[0], p[1], p[2], tol);
      const double rhs = p[0] / std::abs(p[1] * p[2]) * decay_factor(k, Point3{p[0], p[1], p[2]});
      return {std::abs(q.value) / rhs, q.ok};
    }
    case Condition::PartialHolder: {
      const auto q0 = partial_kernel(k, p[0], p[1], p[2], tol);
      const auto q1 = partial_kernel(k, p[0], p[1] + p[3], p[2] + p[4], tol);
      const double rhs = std::pow(rel(p[3], p[1]) + rel(p[4], p[2]), k.alpha23) * p[0] / std::abs(p[1] * p[2]) *
                         decay_factor(k, Point3{p[0], p[1], p[2]});
      return {std::abs(q1.value - q0.value) / rhs, q0.ok && q1.ok};
    }
    case Condition::WBP: {
      const Point3 sides{p[0], p[1], p[0] * p[1]};
      const auto q = self_pairing(k, sides, tol);
      return {std::abs(q.value) / (sides[0] * sides[1] * sides[2]), q.ok};
    }
  }
  return {};
}

std::vector<double> draw(Condition c, Rng& rng, const SamplePlan& plan) {
  std::uniform_real_distribution<double> inc(-8.0, -1.0), scale(plan.lo_exp, plan.hi_exp);
  std::bernoulli_distribution sgn(0.5);
  auto coord = [&] { return log_uniform_signed(rng, plan.lo_exp, plan.hi_exp); };
  // |h| <= |x|/2.
  auto incr = [&](double x) { return x * std::exp2(inc(rng)) * (sgn(rng) ? 1.0 : -1.0); };
  auto radii = [&]() {
    double a = std::exp2(scale(rng)), b = std::exp2(scale(rng));
    while (a == b) b = std::exp2(scale(rng));
    return std::pair{std::min(a, b), std::max(a, b)};
  };
  switch (c) {
    case Condition::Size: return {coord(), coord(), coord()};
    case Condition::Mixed1:
    case Condition::Mixed23:
    case Condition::Holder:
    case Condition::R: {
      std::vector<double> p{coord(), coord(), coord()};
      for (int m = 0; m < 3; ++m) p.push_back(incr(p[static_cast<std::size_t>(m)]));
      return p;
    }
    case Condition::C1a: {
      std::vector<double> p(6);
      for (int m = 0; m < 3; ++m) std::tie(p[m], p[3 + m]) = radii();
      return p;
    }
    case Condition::C1j: {
      std::vector<double> p(12);
      for (int m = 0; m < 3; ++m) std::tie(p[m], p[3 + m]) = radii();
      for (int m = 0; m < 3; ++m) p[6 + m] = coord();
      for (int m = 0; m < 3; ++m) p[9 + m] = incr(p[6 + m]);
      return p;
    }
    case Condition::C2b: {
      std::vector<double> p(6);
      std::tie(p[0], p[1]) = radii();
      p[2] = coord();
      p[3] = coord();
      p[4] = incr(p[2]);
      p[5] = incr(p[3]);
      return p;
    }
    case Condition::PartialSize: return {std::exp2(scale(rng)), coord(), coord()};
    case Condition::PartialHolder: {
      std::vector<double> p{std::exp2(scale(rng)), coord(), coord()};
      p.push_back(incr(p[1]));
      p.push_back(incr(p[2]));
      return p;
    }
    case Condition::WBP: return {std::exp2(scale(rng)), std::exp2(scale(rng))};
  }
  return {};
}

}  // namespace

ConditionReport check_condition(const KernelSpec& k, Condition c, const SamplePlan& plan) {
  if (plan.samples <= 0) throw std::invalid_argument("sample plan needs a positive count");
  Rng rng(plan.seed);
  std::vector<std::vector<double>> samples;
  samples.reserve(static_cast<std::size_t>(plan.samples));
  for (int i = 0; i < plan.samples; ++i) samples.push_back(draw(c, rng, plan));
  std::vector<Eval> evals(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) { evals[i] = evaluate(k, c, samples[i]); });

  ConditionReport r;
  r.condition = c;
  r.samples = plan.samples;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    if (!evals[i].ok) ++r.quadrature_failures;
    if (evals[i].ratio > r.sup_ratio) {
      r.sup_ratio = evals[i].ratio;
      arg = i;
    }
  }
  r.maximizer = samples[arg];
  return r;
}

// ---------------------------------------------------------------------------------------------
// Discretization

namespace {

struct Node {
  double s, w;
};

// Gauss-Legendre rule on [a, b] with weights multiplied by `weight(s)`.
template <class W>
void gl_piece(std::vector<Node>& out, double a, double b, W&& weight) {
  using G = boost::math::quadrature::gauss<double, 8>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (double sg : {-1.0, 1.0}) {
      if (x[i] == 0.0 && sg < 0.0) continue;
      const double s = c + sg * r * x[i];
      out.push_back({s, r * w[i] * weight(s)});
    }
  }
}

// Pieces [0, h] refined geometrically toward 0.
template <class W>
void graded_piece(std::vector<Node>& out, double h, int grading, W&& weight) {
  double hi = h;
  for (int g = 0; g < grading; ++g) {
    gl_piece(out, hi / 2.0, hi, weight);
    hi /= 2.0;
  }
  gl_piece(out, 0.0, hi, weight);
}

// Nodes of the normalized tent (h - |s - d h|)_+ / h^2 for d >= 0.
std::vector<Node> tent_nodes(std::int64_t d, double h, int grading) {
  std::vector<Node> out;
  const double c = static_cast<double>(d) * h;
  auto w = [c, h](double s) { return (h - std::abs(s - c)) / (h * h); };
  if (d == 0) {
    std::vector<Node> half;
    graded_piece(half, h, grading, w);
    out = half;
    for (const auto& n : half) out.push_back({-n.s, n.w});
  } else if (d == 1) {
    graded_piece(out, h, grading, w);
    gl_piece(out, h, 2.0 * h, w);
  } else {
    gl_piece(out, c - h, c, w);
    gl_piece(out, c, c + h, w);
  }
  return out;
}

// Nodes of one tent; for d = 0 the second half mirrors the first, node by node.
struct AxisRule {
  std::vector<Node> nodes;
  std::size_t split;  // first index of the mirrored half, or nodes.size()
};

AxisRule axis_rule(std::int64_t d, double h, int grading, double eps, double N) {
  auto nodes = tent_nodes(std::abs(d), h, grading);
  if (d < 0)
    for (auto& n : nodes) n.s = -n.s;
  AxisRule r;
  for (const auto& n : nodes)
    if (std::abs(n.s) > eps && std::abs(n.s) < N) r.nodes.push_back(n);
  r.split = d == 0 ? r.nodes.size() / 2 : r.nodes.size();
  return r;
}

// Sum of term(i) over the rule, halves accumulated separately so mirrored halves of odd terms cancel exactly.
template <class F>
double rule_sum(const AxisRule& r, F&& term) {
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < r.split; ++i) lo += term(r.nodes[i]);
  for (std::size_t i = r.split; i < r.nodes.size(); ++i) hi += term(r.nodes[i]);
  return lo + hi;
}

}  // namespace

std::size_t DiscreteOperator::stencil_index(std::int64_t d1, std::int64_t d2, std::int64_t d3) const {
  const std::int64_t m2 = 2 * shape_.n2() - 1, m3 = 2 * shape_.n3() - 1;
  return static_cast<std::size_t>(((d1 + shape_.n1() - 1) * m2 + (d2 + shape_.n2() - 1)) * m3 + (d3 + shape_.n3() - 1));
}

DiscreteOperator DiscreteOperator::dense(Shape s, std::vector<double> matrix, nlohmann::json provenance) {
  if (matrix.size() != s.size() * s.size()) throw std::invalid_argument("dense matrix size does not match the grid");
  for (double v : matrix)
    if (!std::isfinite(v)) throw std::invalid_argument("dense matrix has a non-finite entry");
  DiscreteOperator T;
  T.shape_ = s;
  T.dense_ = true;
  T.data_ = std::move(matrix);
  T.provenance_ = std::move(provenance);
  return T;
}

DiscreteOperator DiscreteOperator::identity(Shape s) {
  std::vector<double> m(s.size() * s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) m[i * s.size() + i] = 1.0 / s.cell_volume();
  return dense(s, std::move(m), {{"kind", "identity"}});
}

DiscreteOperator stencil_from(const Shape& s, std::vector<double> stencil, nlohmann::json provenance) {
  const auto expect = static_cast<std::size_t>((2 * s.n1() - 1) * (2 * s.n2() - 1) * (2 * s.n3() - 1));
  if (stencil.size() != expect) throw std::invalid_argument("stencil size does not match the grid");
  DiscreteOperator T;
  T.shape_ = s;
  T.data_ = std::move(stencil);
  T.provenance_ = std::move(provenance);
  return T;
}

double DiscreteOperator::entry(std::size_t cell, std::size_t cell2) const {
  if (dense_) return data_[cell * shape_.size() + cell2];
  const std::int64_t n2 = shape_.n2(), n3 = shape_.n3();
  const auto c = static_cast<std::int64_t>(cell), c2 = static_cast<std::int64_t>(cell2);
  return data_[stencil_index(c / (n2 * n3) - c2 / (n2 * n3), (c / n3) % n2 - (c2 / n3) % n2, c % n3 - c2 % n3)];
}

namespace {

GridFunction3D apply_impl(const DiscreteOperator& T, const GridFunction3D& f, bool adjoint) {
  const Shape& s = T.shape();
  if (!(f.shape() == s)) throw std::invalid_argument("operator and function grids differ");
  const std::size_t N = s.size();
  const double vol = s.cell_volume();
  std::vector<double> out(N, 0.0);
  const auto& v = f.values();
  parallel_for(N, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      if (v[j] == 0.0) continue;
      acc += (adjoint ? T.entry(j, i) : T.entry(i, j)) * v[j];
    }
    out[i] = acc * vol;
  });
  return GridFunction3D(s, std::move(out));
}

}  // namespace

GridFunction3D DiscreteOperator::apply(const GridFunction3D& f) const { return apply_impl(*this, f, false); }
GridFunction3D DiscreteOperator::apply_adjoint(const GridFunction3D& f) const { return apply_impl(*this, f, true); }

void DiscreteOperator::save(const std::string& stem) const {
  {
    std::ofstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot write " + stem + ".bin");
    bin.write(reinterpret_cast<const char*>(data_.data()), static_cast<std::streamsize>(data_.size() * sizeof(double)));
  }
  nlohmann::json j{{"shape", {shape_.l1, shape_.l2, shape_.l3}},
                   {"dense", dense_},
                   {"count", data_.size()},
                   {"effective_eps", eff_eps_},
                   {"provenance", provenance_}};
  std::ofstream js(stem + ".json");
  if (!js) throw std::runtime_error("cannot write " + stem + ".json");
  js << j.dump(2) << "\n";
}

DiscreteOperator DiscreteOperator::load(const std::string& stem) {
  std::ifstream js(stem + ".json");
  if (!js) throw std::runtime_error("cannot read " + stem + ".json");
  const auto j = nlohmann::json::parse(js);
  DiscreteOperator T;
  T.shape_ = Shape{j["shape"][0], j["shape"][1], j["shape"][2]};
  T.dense_ = j["dense"];
  T.eff_eps_ = j["effective_eps"];
  T.provenance_ = j["provenance"];
  T.data_.resize(j["count"].get<std::size_t>());
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + stem + ".bin");
  bin.read(reinterpret_cast<char*>(T.data_.data()), static_cast<std::streamsize>(T.data_.size() * sizeof(double)));
  if (!bin) throw std::runtime_error(stem + ".bin is truncated");
  return T;
}

DiscreteOperator discretize(const KernelSpec& k, const Shape& s, const Truncation& tr, int grading) {
  if (grading < 0) throw std::invalid_argument("grading must be nonnegative");
  // The bump kernel is smooth across the singular planes.
  if (k.form == KernelSpec::Form::BumpProduct) grading = 0;
  std::array<double, 3> eps{}, h{};
  for (int m = 0; m < 3; ++m) {
    h[m] = 1.0 / static_cast<double>(s.n(m));
    if (!(tr.eps[m] >= 0.0 && tr.N[m] > tr.eps[m])) throw ConfigError("truncation needs 0 <= eps < N");
    if (tr.eps[m] >= h[m]) throw ConfigError("truncation eps is coarser than a cell");
    eps[m] = tr.eps[m];
    // The singular plane of a non-odd custom kernel is cut out at cell width.
    if (k.form == KernelSpec::Form::Custom && !k.odd[m]) eps[m] = std::max(eps[m], h[m]);
  }
  const std::array<std::int64_t, 3> n{s.n1(), s.n2(), s.n3()};
  std::array<std::vector<AxisRule>, 3> nodes;
  for (int m = 0; m < 3; ++m)
    for (std::int64_t d = -(n[m] - 1); d <= n[m] - 1; ++d) nodes[m].push_back(axis_rule(d, h[m], grading, eps[m], tr.N[m]));

  DiscreteOperator T;
  T.shape_ = s;
  T.eff_eps_ = eps;
  const std::size_t m1 = nodes[0].size(), m2 = nodes[1].size(), m3 = nodes[2].size();
  T.data_.assign(m1 * m2 * m3, 0.0);
  parallel_for(m1 * m2, [&](std::size_t row) {
    const auto& a = nodes[0][row / m2];
    const auto& b = nodes[1][row % m2];
    for (std::size_t i3 = 0; i3 < m3; ++i3) {
      const auto& c = nodes[2][i3];
      T.data_[row * m3 + i3] = rule_sum(c, [&](const Node& z) {
        return z.w * rule_sum(b, [&](const Node& y) {
                 return y.w * rule_sum(a, [&](const Node& x) { return x.w * kernel_eval(k, Point3{x.s, y.s, z.s}); });
               });
      });
    }
  });
  T.provenance_ = {{"kernel", k.describe()},
                   {"shape", {s.l1, s.l2, s.l3}},
                   {"eps", tr.eps},
                   {"N", {std::min(tr.N[0], 1e300), std::min(tr.N[1], 1e300), std::min(tr.N[2], 1e300)}},
                   {"quadrature", "tent-averaged Gauss-Legendre 8 per piece"},
                   {"grading", grading}};
  return T;
}

double pairing(const DiscreteOperator& T, const GridFunction3D& f, const GridFunction3D& g) {
  if (!(f.shape() == T.shape()) || !(g.shape() == T.shape())) throw std::invalid_argument("pairing: shape mismatch");
  return inner(T.apply(f), g);
}

// ---------------------------------------------------------------------------------------------
// Continuous pairings

double PiecewiseLinear::operator()(double s) const {
  if (x.empty() || s <= x.front() || s >= x.back()) return 0.0;
  const auto it = std::upper_bound(x.begin(), x.end(), s);
  const auto j = static_cast<std::size_t>(it - x.begin());
  const double x0 = x[j - 1], x1 = x[j];
  const double t = (s - x0) / (x1 - x0);
  return y[j - 1] + t * (y[j] - y[j - 1]);
}

PiecewiseLinear correlation(const std::vector<StepPiece>& b, const std::vector<StepPiece>& a) {
  std::vector<double> bp;
  for (const auto& p : b)
    for (const auto& q : a) {
      if (!(p.hi > p.lo) || !(q.hi > q.lo)) throw std::invalid_argument("step pieces need lo < hi");
      bp.insert(bp.end(), {p.lo - q.hi, p.lo - q.lo, p.hi - q.hi, p.hi - q.lo});
    }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  PiecewiseLinear c;
  c.x = bp;
  for (double s : bp) {
    double v = 0.0;
    for (const auto& p : b)
      for (const auto& q : a) {
        const double ov = std::min(p.hi, q.hi + s) - std::max(p.lo, q.lo + s);
        if (ov > 0.0) v += p.value * q.value * ov;
      }
    c.y.push_back(v);
  }
  return c;
}

namespace {

// Positive breakpoints of s -> c(s) - c(-s) on (0, max |x|].
std::vector<double> folded_breaks(const PiecewiseLinear& c) {
  std::vector<double> out{0.0};
  for (double v : c.x)
    if (v != 0.0) out.push_back(std::abs(v));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// integral of (alpha + beta s) / (a^2 + s^2) over [u0, u1] for a > 0.
double lorentz_piece(double alpha, double beta, double u0, double u1, double a) {
  const double width = u1 - u0;
  const double dist = u0 > 0.0 ? u0 : (u1 < 0.0 ? -u1 : 0.0);
  if (dist >= width) {
    // The poles at +-ia are far from the piece: Gauss-Legendre is accurate and free of cancellation.
    using G = boost::math::quadrature::gauss<double, 20>;
    return G::integrate([&](double s) { return (alpha + beta * s) / (a * a + s * s); }, u0, u1);
  }
  // atan(u1/a) - atan(u0/a) without cancellation when u0 u1 > 0.
  const double at = u0 * u1 > 0.0 ? std::atan(width * a / (a * a + u0 * u1)) : std::atan(u1 / a) - std::atan(u0 / a);
  const double ratio = width * (u1 + u0) / (a * a + u0 * u0);
  const double lg = std::fabs(ratio) < 0.5 ? std::log1p(ratio) : 2.0 * std::log(std::hypot(a, u1) / std::hypot(a, u0));
  return alpha / a * at + 0.5 * beta * lg;
}

// integral of c(s) / (a^2 + s^2) ds.
double lorentz_integral(const PiecewiseLinear& c, double a) {
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < c.x.size(); ++j) {
    const double u0 = c.x[j], u1 = c.x[j + 1];
    if (!(u1 > u0)) continue;
    const double beta = (c.y[j + 1] - c.y[j]) / (u1 - u0);
    const double alpha = c.y[j] - beta * u0;
    total += lorentz_piece(alpha, beta, u0, u1, a);
  }
  return total;
}

// s -> c(s) + sign c(-s) on [0, max |x|] as a piecewise linear function.
PiecewiseLinear folded_linear(const PiecewiseLinear& c, double sign = -1.0) {
  PiecewiseLinear o;
  o.x = folded_breaks(c);
  for (double s : o.x) o.y.push_back(c(s) + sign * c(-s));
  return o;
}

bool vanishes(const PiecewiseLinear& c) {
  return std::all_of(c.y.begin(), c.y.end(), [](double v) { return v == 0.0; });
}

// M(u) = int o1(s) o2(u/s) ds/s, exact on each pair of linear pieces.
double mellin(const PiecewiseLinear& o1, const PiecewiseLinear& o2, double u) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < o1.x.size(); ++i) {
    const double a0 = o1.x[i], a1 = o1.x[i + 1];
    const double b1 = (o1.y[i + 1] - o1.y[i]) / (a1 - a0), al1 = o1.y[i] - b1 * a0;
    if (al1 == 0.0 && b1 == 0.0) continue;
    for (std::size_t j = 0; j + 1 < o2.x.size(); ++j) {
      const double c0 = o2.x[j], c1 = o2.x[j + 1];
      // s in [a0, a1] and u/s in [c0, c1].
      const double p = std::max(a0, u / c1);
      const double q = c0 > 0.0 ? std::min(a1, u / c0) : a1;
      if (!(q > p) || p <= 0.0) continue;
      const double b2 = (o2.y[j + 1] - o2.y[j]) / (c1 - c0), al2 = o2.y[j] - b2 * c0;
      if (q <= 2.0 * p) {
        // The closed form cancels as q/p -> 1; the pole at 0 is at least a width away.
        using G = boost::math::quadrature::gauss<double, 10>;
        total += G::integrate([&](double s) { return (al1 + b1 * s) * (o2.y[j] + b2 * (u / s - c0)) / s; }, p, q);
      } else {
        total += (al1 * al2 + b1 * b2 * u) * std::log(q / p) + al1 * b2 * u * (1.0 / p - 1.0 / q) + b1 * al2 * (q - p);
      }
    }
  }
  return total;
}

// Pieces between consecutive breaks, sharing one error budget. With `log_at_zero` a piece
// starting at 0 carries an integrable logarithmic singularity and goes to tanh-sinh.
template <class F>
double over_breaks(F&& f, const std::vector<double>& br, double tol, bool& ok, double& err_sum,
                   bool log_at_zero = false) {
  double total = 0.0, l1_sum = 0.0;
  for (std::size_t j = 0; j + 1 < br.size(); ++j) {
    double err = 0.0, l1 = 0.0, v = 0.0;
    if (log_at_zero && br[j] == 0.0) {
      boost::math::quadrature::tanh_sinh<double> ts;
      v = ts.integrate(f, br[j], br[j + 1], tol, &err, &l1);
    } else {
      v = GK::integrate(f, br[j], br[j + 1], kDepth, tol, &err, &l1);
    }
    if (!std::isfinite(v) || !std::isfinite(err)) ok = false;
    err_sum += err;
    l1_sum += l1;
    total += v;
  }
  if (!quad_ok(total, err_sum, l1_sum)) ok = false;
  return total;
}

std::vector<double> all_breaks(const PiecewiseLinear& c, bool fold) {
  if (fold) return folded_breaks(c);
  std::vector<double> out = c.x;
  if (!out.empty() && out.front() < 0.0 && out.back() > 0.0) out.push_back(0.0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

QuadResult continuous_pairing(const KernelSpec& k, const std::array<PiecewiseLinear, 3>& c, double tol) {
  for (const auto& f : c)
    if (f.x.size() != f.y.size()) throw std::invalid_argument("piecewise linear data size mismatch");
  for (const auto& f : c)
    if (f.x.size() < 2) return {0.0, 0.0, true};
  bool ok = true;
  double err = 0.0;

  if (k.form == KernelSpec::Form::BumpProduct) {
    const Bump& b = Bump::standard();
    double v = D_theta(k.t, k.theta);
    for (int m = 0; m < 3; ++m) {
      const double t = k.t[m];
      const auto& f = c[m];
      double axis = 0.0;
      for (std::size_t j = 0; j + 1 < f.x.size(); ++j) {
        const double u0 = f.x[j], u1 = f.x[j + 1];
        if (!(u1 > u0)) continue;
        const double beta = (f.y[j + 1] - f.y[j]) / (u1 - u0);
        const double alpha = f.y[j] - beta * u0;
        axis += b.integral(u0 / t, u1 / t, [&](double u) { return alpha + beta * t * u; });
      }
      v *= axis;
    }
    return {v, std::abs(v) * 1e-13, std::isfinite(v)};
  }

  if (k.form == KernelSpec::Form::NagelWainger) {
    // Folding s1, s2 > 0 gives o1(s1) o2(s2) F(s1 s2), F(a) = int e3(s)/(a^2+s^2) ds over s > 0 with
    // e3 the even part of c3; with u = s1 s2 the pairing is int F(u) M(u) du, M the Mellin
    // convolution of o1 and o2 in closed form. Symmetry zeros come out exact.
    const auto o1 = folded_linear(c[0]), o2 = folded_linear(c[1]), e3 = folded_linear(c[2], 1.0);
    if (vanishes(o1) || vanishes(o2) || vanishes(e3)) return {0.0, 0.0, true};
    std::vector<double> ub{0.0};
    for (double p : o1.x)
      for (double q : o2.x)
        if (p > 0.0 && q > 0.0) ub.push_back(p * q);
    const double top = o1.x.back() * o2.x.back();
    for (double v : e3.x)
      if (v > 0.0 && v < top) ub.push_back(v);
    std::sort(ub.begin(), ub.end());
    ub.erase(std::unique(ub.begin(), ub.end()), ub.end());
    auto integrand = [&](double u) {
      if (u < 1e-100) return 0.0;  // |F M| <= C log(1/u) there
      const double m = mellin(o1, o2, u);
      return m == 0.0 ? 0.0 : m * lorentz_integral(e3, u);
    };
    const double v = over_breaks(integrand, ub, tol, ok, err, true);
    return {v, err, ok && std::isfinite(v)};
  }

  // Custom: nested quadrature, folded along odd axes.
  std::array<std::vector<double>, 3> br;
  for (int m = 0; m < 3; ++m) br[m] = all_breaks(c[m], k.odd[m]);
  auto weight = [&](int m, double s) { return k.odd[m] ? c[m](s) - c[m](-s) : c[m](s); };
  std::function<double(int, Point3&)> level = [&](int m, Point3& s) -> double {
    if (m == 3) return kernel_eval(k, s);
    double e = 0.0;
    return over_breaks(
        [&](double u) {
          const double w = weight(m, u);
          if (w == 0.0) return 0.0;
          Point3 t = s;
          t[m] = u;
          return w * level(m + 1, t);
        },
        br[m], tol, ok, e);
  };
  Point3 s{};
  const double v = level(0, s);
  return {v, err, ok && std::isfinite(v)};
}

// ---------------------------------------------------------------------------------------------

LowerBoundReport convolution_lower_bound(const Box& R, const GridFunction3D& f) {
  const Shape& s = f.shape();
  for (double v : f.values())
    if (v < 0.0) throw std::invalid_argument("convolution lower bound needs f >= 0");
  for (int m = 0; m < 3; ++m)
    if (!(R.side(m) > 0.0)) throw std::invalid_argument("box needs positive sides");
  const Bump& b = Bump::standard();
  // M[m][p][c] = integral over cell c of (1/t) phi((x_p - y)/t) dy with t the side of R.
  std::array<std::vector<std::vector<double>>, 3> M;
  std::array<std::size_t, 3> np{};
  for (int m = 0; m < 3; ++m) {
    const auto n = static_cast<std::size_t>(s.n(m));
    const double lo = R.lo[m], t = R.side(m), w = t / static_cast<double>(n);
    std::vector<double> pts;
    for (std::size_t p = 0; p < n; ++p) pts.push_back(lo + (static_cast<double>(p) + 0.5) * w);
    pts.push_back(R.lo[m]);
    pts.push_back(R.hi[m]);
    np[m] = pts.size();
    for (double x : pts) {
      std::vector<double> row(n);
      for (std::size_t c = 0; c < n; ++c) {
        const double a = lo + static_cast<double>(c) * w, bb = lo + static_cast<double>(c + 1) * w;
        row[c] = b.integral((x - bb) / t, (x - a) / t);
      }
      M[m].push_back(std::move(row));
    }
  }
  const auto n1 = static_cast<std::size_t>(s.n1()), n2 = static_cast<std::size_t>(s.n2()),
             n3 = static_cast<std::size_t>(s.n3());
  const auto& v = f.values();
  // Contract axis 3, then 2, then 1.
  std::vector<double> g3(n1 * n2 * np[2], 0.0);
  for (std::size_t i = 0; i < n1 * n2; ++i)
    for (std::size_t p = 0; p < np[2]; ++p) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n3; ++c) acc += v[i * n3 + c] * M[2][p][c];
      g3[i * np[2] + p] = acc;
    }
  std::vector<double> g2(n1 * np[1] * np[2], 0.0);
  for (std::size_t i1 = 0; i1 < n1; ++i1)
    for (std::size_t p2 = 0; p2 < np[1]; ++p2)
      for (std::size_t p3 = 0; p3 < np[2]; ++p3) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n2; ++c) acc += g3[(i1 * n2 + c) * np[2] + p3] * M[1][p2][c];
        g2[(i1 * np[1] + p2) * np[2] + p3] = acc;
      }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  LowerBoundReport r;
  r.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t p1 = 0; p1 < np[0]; ++p1)
    for (std::size_t p2 = 0; p2 < np[1]; ++p2)
      for (std::size_t p3 = 0; p3 < np[2]; ++p3) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n1; ++c) acc += g2[(c * np[1] + p2) * np[2] + p3] * M[0][p1][c];
        r.min_margin = std::min(r.min_margin, acc - mean);
        ++r.points;
      }
  return r;
}

}  // namespace zyg
