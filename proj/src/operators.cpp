#include "zygmund/operators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

namespace zyg {

namespace {

GridFunction3D level_average(const GridFunction3D& f, const Grids3& frame, const std::array<int, 3>& lv) {
  return level_E_axis(level_E_axis(level_E_axis(f, frame, 2, lv[2]), frame, 1, lv[1]), frame, 0, lv[0]);
}

void pointwise_max_into(std::vector<double>& acc, const GridFunction3D& g) {
  const auto& v = g.values();
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = std::max(acc[i], v[i]);
}

}  // namespace

std::vector<std::array<int, 3>> clamped_levels(const Shape& s, const LatticeFamily& family) {
  std::set<std::array<int, 3>> out;
  // Beyond this bound every axis is clamped, so larger triples repeat.
  const int top = s.l1 + s.l2 + s.l3 + std::abs(family.k) + 1;
  auto add = [&](int j1, int j2, int j3) {
    if (j1 < 0 || j2 < 0 || j3 < 0) return;
    out.insert({std::min(j1, s.l1), std::min(j2, s.l2), std::min(j3, s.l3)});
  };
  for (int j1 = 0; j1 <= top; ++j1)
    for (int j2 = 0; j2 <= top; ++j2) {
      switch (family.kind) {
        case LatticeFamily::Kind::Zygmund: add(j1, j2, j1 + j2); break;
        case LatticeFamily::Kind::Dilated: add(j1, j2, j1 + j2 - family.k); break;
        case LatticeFamily::Kind::SubZygmund:
          for (int j3 = j1 + j2; j3 <= j1 + j2 + s.l3; ++j3) add(j1, j2, j3);
          break;
        case LatticeFamily::Kind::Full:
          for (int j3 = 0; j3 <= s.l3; ++j3) add(j1, j2, j3);
          break;
      }
    }
  return {out.begin(), out.end()};
}

GridFunction3D maximal(const GridFunction3D& f, const Grids3& frame, const LatticeFamily& family) {
  check_frame(f.shape(), frame);
  const GridFunction3D a = f.abs();
  std::vector<double> acc(f.size(), 0.0);
  for (const auto& lv : clamped_levels(f.shape(), family)) pointwise_max_into(acc, level_average(a, frame, lv));
  return GridFunction3D(f.shape(), std::move(acc));
}

GridFunction3D maximal_axis(const GridFunction3D& f, const Grids3& frame, int axis) {
  check_frame(f.shape(), frame);
  const GridFunction3D a = f.abs();
  std::vector<double> acc(f.size(), 0.0);
  for (int j = 0; j <= f.shape().level(axis); ++j) pointwise_max_into(acc, level_E_axis(a, frame, axis, j));
  return GridFunction3D(f.shape(), std::move(acc));
}

namespace {

// Sum of Delta_{I,Z} f over all I at levels (l1, l2, l1+l2).
GridFunction3D level_delta_Z(const GridFunction3D& f, const Grids3& frame, int l1, int l2) {
  return level_op1(level_op23(f, frame, l2, l1 + l2, Op::Delta), frame, l1, Op::Delta);
}

bool representable_level(const Shape& s, int l1, int l2) {
  return l1 >= 0 && l2 >= 0 && l1 < s.l1 && l2 < s.l2 && l1 + l2 < s.l3;
}

}  // namespace

GridFunction3D square_function_Z(const GridFunction3D& f, const Grids3& frame) {
  const Shape& s = f.shape();
  check_frame(s, frame);
  std::vector<double> acc(f.size(), 0.0);
  for (int l1 = 0; l1 < s.l1; ++l1)
    for (int l2 = 0; l2 < s.l2; ++l2) {
      if (!representable_level(s, l1, l2)) continue;
      const GridFunction3D D = level_delta_Z(f, frame, l1, l2);
      const auto& d = D.values();
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i] * d[i];
    }
  for (auto& x : acc) x = std::sqrt(x);
  return GridFunction3D(s, std::move(acc));
}

ULevels u_levels(int a, int b, const Complexity& k) {
  const int M = std::max(k[1], k[2]);
  return {a, a + k[0], b + k[1] - M, b + k[0] + k[1]};
}

int u_count_bound(const Complexity& k) { return (k[0] + 1) * (k[0] + std::max(k[1], k[2]) + 1); }

namespace {

void check_complexity(const Complexity& k) {
  for (int x : k)
    if (x < 0) throw std::invalid_argument("complexity entries must be nonnegative");
}

// Sum over the admissible L levels of the level Zygmund differences for K levels (a, b).
GridFunction3D u_level_sum(const GridFunction3D& f, const Grids3& frame, int a, int b, const Complexity& k) {
  const Shape& s = f.shape();
  const ULevels u = u_levels(a, b, k);
  std::vector<double> acc(f.size(), 0.0);
  for (int l1 = u.l1_lo; l1 <= u.l1_hi; ++l1)
    for (int l2 = u.l2_lo; l2 <= u.l2_hi; ++l2) {
      if (!representable_level(s, l1, l2)) continue;
      const GridFunction3D D = level_delta_Z(f, frame, l1, l2);
      const auto& d = D.values();
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
    }
  return GridFunction3D(s, std::move(acc));
}

int k_level3(int a, int b, const Complexity& k) { return a + b + k[0] + k[1] - k[2]; }

}  // namespace

GridFunction3D u_block(const GridFunction3D& f, const Grids3& frame, const Rect3& K, const Complexity& k) {
  const Shape& s = f.shape();
  check_frame(s, frame);
  check_complexity(k);
  const auto lv = K.levels();
  if (lv[2] != k_level3(lv[0], lv[1], k)) throw std::invalid_argument("u_block: K is not in the lattice of complexity k");
  for (int m = 0; m < 3; ++m)
    if (lv[static_cast<std::size_t>(m)] > s.level(m)) throw ResolutionError("u_block: K finer than the grid");
  const ULevels u = u_levels(lv[0], lv[1], k);
  std::vector<double> acc(f.size(), 0.0);
  // Explicit sum over rectangles L with L^1 inside K^1 whose support meets K.
  for (int l1 = u.l1_lo; l1 <= u.l1_hi; ++l1)
    for (int l2 = u.l2_lo; l2 <= u.l2_hi; ++l2) {
      if (!representable_level(s, l1, l2)) continue;
      for (const auto& L1 : frame.axis[0].level_intervals(l1)) {
        if (!frame.axis[0].contains(K.axes[0], L1)) continue;
        for (const auto& L2 : frame.axis[1].level_intervals(l2))
          for (const auto& L3 : frame.axis[2].level_intervals(l1 + l2))
            block_op_accumulate(f, frame, Rect3{{L1, L2, L3}}, Op::Delta, Op::Delta, 1.0, acc);
      }
    }
  CellSpan sp[3];
  for (int m = 0; m < 3; ++m) sp[m] = cell_span(frame.axis[static_cast<std::size_t>(m)], K.axes[static_cast<std::size_t>(m)]);
  std::vector<double> out(f.size(), 0.0);
  for (std::int64_t t1 = 0; t1 < sp[0].length; ++t1)
    for (std::int64_t t2 = 0; t2 < sp[1].length; ++t2)
      for (std::int64_t t3 = 0; t3 < sp[2].length; ++t3) {
        const std::size_t i = s.index(sp[0].cell(t1), sp[1].cell(t2), sp[2].cell(t3));
        out[i] = acc[i];
      }
  return GridFunction3D(s, std::move(out));
}

GridFunction3D u_square(const GridFunction3D& f, const Grids3& frame, const Complexity& k) {
  const Shape& s = f.shape();
  check_frame(s, frame);
  check_complexity(k);
  // The K at fixed levels partition the torus, so sum_K |1_K G|^2 = |G|^2.
  std::vector<double> acc(f.size(), 0.0);
  for (int a = 0; a <= s.l1; ++a)
    for (int b = 0; b <= s.l2; ++b) {
      const int c = k_level3(a, b, k);
      if (c < 0 || c > s.l3) continue;
      const GridFunction3D G = u_level_sum(f, frame, a, b, k);
      const auto& g = G.values();
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i] * g[i];
    }
  for (auto& x : acc) x = std::sqrt(x);
  return GridFunction3D(s, std::move(acc));
}

double phi(const Complexity& k, double theta, double alpha1, double alpha23) {
  for (double v : {theta, alpha1, alpha23})
    if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("phi: parameters must lie in (0,1]");
  check_complexity(k);
  const double e = -k[0] * alpha1 - k[1] * std::min(alpha23, theta) - std::max(k[2] - k[0] - k[1], 0) * theta;
  return std::exp2(e);
}

// ---------------------------------------------------------------- shifts

double ShiftSpec::bound_ratio() const { return exp2i(-(k[0] + k[1] + k[2])); }

namespace {

void descendants(const ShiftedGrid& g, const DyadicInterval& K, int depth, std::vector<DyadicInterval>& out) {
  if (depth == 0) {
    out.push_back(K);
    return;
  }
  for (const auto& c : g.children(K)) descendants(g, c, depth - 1, out);
}

std::vector<Rect3> rect_descendants(const Grids3& frame, const Rect3& K, const Complexity& k) {
  std::array<std::vector<DyadicInterval>, 3> d;
  for (std::size_t m = 0; m < 3; ++m) descendants(frame.axis[m], K.axes[m], k[m], d[m]);
  std::vector<Rect3> out;
  for (const auto& a : d[0])
    for (const auto& b : d[1])
      for (const auto& c : d[2]) out.push_back(Rect3{{a, b, c}});
  return out;
}

}  // namespace

ShiftKey shift_key(const ShiftSpec& q, const ShiftEntry& e) {
  ShiftKey key{};
  for (std::size_t m = 0; m < 3; ++m) {
    key.level[m] = e.K.axes[m].level;
    key.K[m] = e.K.axes[m].index;
    key.I[m] = q.frame.axis[m].position_in_parent(e.I.axes[m], q.k[m]);
    key.J[m] = q.frame.axis[m].position_in_parent(e.J.axes[m], q.k[m]);
  }
  return key;
}

ShiftSpec make_shift(const Complexity& k, int form, CoeffRule rule, const Shape& s, const Grids3& frame,
                     std::uint64_t seed, const CoeffTable* table) {
  check_frame(s, frame);
  check_complexity(k);
  if (form < 1 || form > 4) throw std::invalid_argument("make_shift: form must be 1..4");
  if (rule == CoeffRule::Table && table == nullptr) throw std::invalid_argument("make_shift: table rule needs a table");
  ShiftSpec q{k, form, s, frame, {}};
  const double bound = q.bound_ratio();
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_int_distribution<int> pick4(0, 3), pick_eta(1, 3), coin(0, 1);
  bool any_level = false;
  for (int a = 0; a + k[0] < s.l1; ++a)
    for (int b = 0; b + k[1] < s.l2; ++b) {
      const int c = k_level3(a, b, k);
      if (c < 0 || c + k[2] >= s.l3) continue;
      any_level = true;
      for (const auto& K1 : frame.axis[0].level_intervals(a))
        for (const auto& K2 : frame.axis[1].level_intervals(b))
          for (const auto& K3 : frame.axis[2].level_intervals(c)) {
            const Rect3 K{{K1, K2, K3}};
            const auto kids = rect_descendants(frame, K, k);
            for (const auto& I : kids)
              for (const auto& J : kids) {
                ShiftEntry e{K, I, J, bound, HVariant::HaarI, HVariant::HaarI, 3};
                switch (rule) {
                  case CoeffRule::Maximal: break;
                  case CoeffRule::RandomSign:
                  case CoeffRule::Random:
                    e.a = rule == CoeffRule::Random ? bound * unif(rng) : (coin(rng) ? bound : -bound);
                    e.v1 = kHVariants[static_cast<std::size_t>(pick4(rng))];
                    e.v23 = kHVariants[static_cast<std::size_t>(pick4(rng))];
                    e.eta = pick_eta(rng);
                    break;
                  case CoeffRule::Table: {
                    const auto it = table->find(shift_key(q, e));
                    if (it == table->end()) continue;
                    if (std::abs(it->second) > bound * (1.0 + 1e-15))
                      throw std::invalid_argument("make_shift: table coefficient exceeds |I|/|K|");
                    e.a = it->second;
                    break;
                  }
                }
                q.entries.push_back(e);
              }
          }
    }
  if (!any_level) throw WindowTooShallow("make_shift: no k-parent fits in the window");
  return q;
}

namespace {

// A function constant on the children of one or two intervals of equal level along one axis.
struct Factor1 {
  std::array<std::int64_t, 4> idx{};
  std::array<double, 4> val{};
  int n = 0;
  void add(std::int64_t i, double v) {
    for (int t = 0; t < n; ++t)
      if (idx[static_cast<std::size_t>(t)] == i) {
        val[static_cast<std::size_t>(t)] += v;
        return;
      }
    idx[static_cast<std::size_t>(n)] = i;
    val[static_cast<std::size_t>(n)] = v;
    ++n;
  }
};

// h^{sig}_J on the children of J, scaled by c.
void add_haar(Factor1& F, const ShiftedGrid& g, const DyadicInterval& J, int sig, double c) {
  const auto ch = g.children(J);
  const double v = c * std::sqrt(std::ldexp(1.0, J.level));
  F.add(ch[0].index, v);
  F.add(ch[1].index, sig ? -v : v);
}

Factor1 haar_factor(const ShiftedGrid& g, const DyadicInterval& J, int sig) {
  Factor1 F;
  add_haar(F, g, J, sig, 1.0);
  return F;
}

Factor1 H_factor(const ShiftedGrid& g, const DyadicInterval& I, const DyadicInterval& J, HVariant v, int sig) {
  Factor1 F;
  switch (v) {
    case HVariant::ZeroIMinusZeroJ:
      add_haar(F, g, I, 0, 1.0);
      add_haar(F, g, J, 0, -1.0);
      break;
    case HVariant::ZeroJMinusZeroI:
      add_haar(F, g, J, 0, 1.0);
      add_haar(F, g, I, 0, -1.0);
      break;
    case HVariant::HaarI: add_haar(F, g, I, sig, 1.0); break;
    case HVariant::HaarJ: add_haar(F, g, J, sig, 1.0); break;
  }
  return F;
}

// Functions on the (x2,x3) children; the H variants are not separable, so keep a list of products.
struct Factor23 {
  std::vector<std::pair<Factor1, Factor1>> terms;
  std::vector<double> scale;
};

Factor23 haar23(const Grids3& fr, const Rect3& R, int eta, double c = 1.0) {
  return {{{haar_factor(fr.axis[1], R.axes[1], eta2_of(eta)), haar_factor(fr.axis[2], R.axes[2], eta3_of(eta))}}, {c}};
}

Factor23 H23(const Grids3& fr, const Rect3& I, const Rect3& J, HVariant v, int eta) {
  switch (v) {
    case HVariant::ZeroIMinusZeroJ:
    case HVariant::ZeroJMinusZeroI: {
      const double sg = v == HVariant::ZeroIMinusZeroJ ? 1.0 : -1.0;
      Factor23 a = haar23(fr, I, 0, sg);
      const Factor23 b = haar23(fr, J, 0, -sg);
      a.terms.push_back(b.terms[0]);
      a.scale.push_back(b.scale[0]);
      return a;
    }
    case HVariant::HaarI: return haar23(fr, I, eta);
    case HVariant::HaarJ: return haar23(fr, J, eta);
  }
  return {};
}

struct Pair {
  Factor1 phi1, psi1;
  Factor23 phi23, psi23;
};

Pair entry_pair(const ShiftSpec& q, const ShiftEntry& e) {
  const Grids3& fr = q.frame;
  const auto& g1 = fr.axis[0];
  Pair p;
  const Factor1 H1 = H_factor(g1, e.I.axes[0], e.J.axes[0], e.v1, 1);
  const Factor23 H = H23(fr, e.I, e.J, e.v23, e.eta);
  switch (q.form) {
    case 1:
      p.phi1 = H1, p.phi23 = H;
      p.psi1 = haar_factor(g1, e.J.axes[0], 1), p.psi23 = haar23(fr, e.J, e.eta);
      break;
    case 2:
      p.phi1 = haar_factor(g1, e.I.axes[0], 1), p.phi23 = haar23(fr, e.I, e.eta);
      p.psi1 = H1, p.psi23 = H;
      break;
    case 3:
      p.phi1 = H1, p.phi23 = haar23(fr, e.I, e.eta);
      p.psi1 = haar_factor(g1, e.J.axes[0], 1), p.psi23 = H;
      break;
    default:
      p.phi1 = haar_factor(g1, e.I.axes[0], 1), p.phi23 = H;
      p.psi1 = H1, p.psi23 = haar23(fr, e.J, e.eta);
      break;
  }
  return p;
}

// Values indexed by the child rectangles at fixed levels (dense, row-major by interval index).
struct LevelTable {
  std::array<int, 3> lv{};
  std::array<std::int64_t, 3> n{};
  std::vector<double> v;
  std::size_t at(std::int64_t i1, std::int64_t i2, std::int64_t i3) const {
    return static_cast<std::size_t>((i1 * n[1] + i2) * n[2] + i3);
  }
};

std::array<std::vector<std::int64_t>, 3> cell_to_index(const Shape& s, const Grids3& fr, const std::array<int, 3>& lv) {
  std::array<std::vector<std::int64_t>, 3> out;
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& g = fr.axis[m];
    out[m].resize(static_cast<std::size_t>(s.n(static_cast<int>(m))));
    for (std::int64_t u = 0; u < s.n(static_cast<int>(m)); ++u) out[m][static_cast<std::size_t>(u)] = g.locate(lv[m], u).index;
  }
  return out;
}

LevelTable integrals(const GridFunction3D& f, const Grids3& fr, const std::array<int, 3>& lv) {
  const Shape& s = f.shape();
  LevelTable T;
  T.lv = lv;
  for (std::size_t m = 0; m < 3; ++m) T.n[m] = std::int64_t{1} << lv[m];
  T.v.assign(static_cast<std::size_t>(T.n[0] * T.n[1] * T.n[2]), 0.0);
  const auto map = cell_to_index(s, fr, lv);
  const double vol = s.cell_volume();
  for (std::int64_t i1 = 0; i1 < s.n1(); ++i1)
    for (std::int64_t i2 = 0; i2 < s.n2(); ++i2)
      for (std::int64_t i3 = 0; i3 < s.n3(); ++i3)
        T.v[T.at(map[0][static_cast<std::size_t>(i1)], map[1][static_cast<std::size_t>(i2)],
                 map[2][static_cast<std::size_t>(i3)])] += f.at(i1, i2, i3) * vol;
  return T;
}

void expand_into(const LevelTable& T, const Shape& s, const Grids3& fr, std::vector<double>& out) {
  const auto map = cell_to_index(s, fr, T.lv);
  for (std::int64_t i1 = 0; i1 < s.n1(); ++i1)
    for (std::int64_t i2 = 0; i2 < s.n2(); ++i2)
      for (std::int64_t i3 = 0; i3 < s.n3(); ++i3)
        out[s.index(i1, i2, i3)] += T.v[T.at(map[0][static_cast<std::size_t>(i1)], map[1][static_cast<std::size_t>(i2)],
                                             map[2][static_cast<std::size_t>(i3)])];
}

double pair_with(const LevelTable& S, const Factor1& f1, const Factor23& f23) {
  double acc = 0.0;
  for (std::size_t t = 0; t < f23.terms.size(); ++t) {
    const auto& [a, b] = f23.terms[t];
    for (int x = 0; x < f1.n; ++x)
      for (int y = 0; y < a.n; ++y)
        for (int z = 0; z < b.n; ++z)
          acc += f23.scale[t] * f1.val[static_cast<std::size_t>(x)] * a.val[static_cast<std::size_t>(y)] *
                 b.val[static_cast<std::size_t>(z)] *
                 S.v[S.at(f1.idx[static_cast<std::size_t>(x)], a.idx[static_cast<std::size_t>(y)], b.idx[static_cast<std::size_t>(z)])];
  }
  return acc;
}

void deposit(LevelTable& T, const Factor1& f1, const Factor23& f23, double c) {
  for (std::size_t t = 0; t < f23.terms.size(); ++t) {
    const auto& [a, b] = f23.terms[t];
    for (int x = 0; x < f1.n; ++x)
      for (int y = 0; y < a.n; ++y)
        for (int z = 0; z < b.n; ++z)
          T.v[T.at(f1.idx[static_cast<std::size_t>(x)], a.idx[static_cast<std::size_t>(y)], b.idx[static_cast<std::size_t>(z)])] +=
              c * f23.scale[t] * f1.val[static_cast<std::size_t>(x)] * a.val[static_cast<std::size_t>(y)] * b.val[static_cast<std::size_t>(z)];
  }
}

std::array<int, 3> child_levels(const ShiftEntry& e) {
  return {e.I.axes[0].level + 1, e.I.axes[1].level + 1, e.I.axes[2].level + 1};
}

}  // namespace

GridFunction3D apply_shift(const ShiftSpec& q, const GridFunction3D& f, bool adjoint) {
  if (!(f.shape() == q.shape)) throw ShapeError("apply_shift: resolution mismatch");
  // Entries sharing child levels share one integral table.
  std::map<std::array<int, 3>, std::vector<const ShiftEntry*>> groups;
  for (const auto& e : q.entries) groups[child_levels(e)].push_back(&e);
  std::vector<double> out(f.size(), 0.0);
  const unsigned hw = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  for (const auto& [lv, list] : groups) {
    const LevelTable S = integrals(f, q.frame, lv);
    const std::size_t nthreads = std::min<std::size_t>(hw, std::max<std::size_t>(1, list.size() / 4096));
    std::vector<LevelTable> acc(nthreads, LevelTable{lv, S.n, std::vector<double>(S.v.size(), 0.0)});
    auto work = [&](std::size_t t) {
      for (std::size_t i = t; i < list.size(); i += nthreads) {
        const ShiftEntry& e = *list[i];
        const Pair p = entry_pair(q, e);
        if (!adjoint) {
          deposit(acc[t], p.psi1, p.psi23, e.a * pair_with(S, p.phi1, p.phi23));
        } else {
          deposit(acc[t], p.phi1, p.phi23, e.a * pair_with(S, p.psi1, p.psi23));
        }
      }
    };
    if (nthreads == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
    }
    LevelTable total = std::move(acc[0]);
    for (std::size_t t = 1; t < nthreads; ++t)
      for (std::size_t i = 0; i < total.v.size(); ++i) total.v[i] += acc[t].v[i];
    expand_into(total, q.shape, q.frame, out);
  }
  return GridFunction3D(q.shape, std::move(out));
}

std::pair<GridFunction3D, GridFunction3D> shift_pair(const ShiftSpec& q, const ShiftEntry& e) {
  const Shape& s = q.shape;
  const auto& fr = q.frame;
  const std::array<DyadicInterval, 2> I23{e.I.axes[1], e.I.axes[2]}, J23{e.J.axes[1], e.J.axes[2]};
  const auto H1 = build_H(fr.axis[0], e.I.axes[0], e.J.axes[0], e.v1).values;
  const auto H = build_H(fr.axis[1], fr.axis[2], I23, J23, e.v23, e.eta).values;
  auto h1 = [&](const DyadicInterval& R) { return haar_1d(fr.axis[0], R, 1); };
  auto h23 = [&](const std::array<DyadicInterval, 2>& R) {
    return build_H(fr.axis[1], fr.axis[2], R, R, HVariant::HaarI, e.eta).values;
  };
  switch (q.form) {
    case 1: return {tensor(s, H1, H), tensor(s, h1(e.J.axes[0]), h23(J23))};
    case 2: return {tensor(s, h1(e.I.axes[0]), h23(I23)), tensor(s, H1, H)};
    case 3: return {tensor(s, H1, h23(I23)), tensor(s, h1(e.J.axes[0]), H)};
    default: return {tensor(s, h1(e.I.axes[0]), H), tensor(s, H1, h23(J23))};
  }
}

// ---------------------------------------------------------------- norms

double lpw_norm(const GridFunction3D& f, double p, const GridFunction3D& w) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("lpw_norm: p must lie in (1, inf)");
  if (!(f.shape() == w.shape())) throw ShapeError("lpw_norm: weight shape mismatch");
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(w[i] > 0.0)) throw WeightError("lpw_norm: weight must be positive on every cell");
    terms[i] = std::pow(std::abs(f[i]), p) * w[i];
  }
  return std::pow(pairwise_sum(terms) * f.shape().cell_volume(), 1.0 / p);
}

NormEstimate weighted_operator_norm(const std::function<GridFunction3D(const GridFunction3D&)>& T,
                                    const std::function<GridFunction3D(const GridFunction3D&)>& T_adjoint,
                                    const GridFunction3D& w, std::uint64_t seed, int max_iter, double tol) {
  const Shape& s = w.shape();
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!(w[i] > 0.0)) throw WeightError("weighted_operator_norm: weight must be positive on every cell");
  Rng rng(seed);
  GridFunction3D f = random_grid(s, rng);
  NormEstimate est;
  double prev = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const double nf = lpw_norm(f, 2.0, w);
    if (nf == 0.0) break;
    f = f * (1.0 / nf);
    const GridFunction3D g = T(f);
    const double ratio = lpw_norm(g, 2.0, w);
    est.norm = std::max(est.norm, ratio);
    est.iterations = it;
    if (ratio == 0.0) {
      est.converged = true;
      break;
    }
    if (prev > 0.0 && std::abs(ratio - prev) <= tol * ratio) {
      est.converged = true;
      break;
    }
    prev = ratio;
    // f <- W^{-1} T^T W T f
    std::vector<double> wg(g.values());
    for (std::size_t i = 0; i < wg.size(); ++i) wg[i] *= w[i];
    std::vector<double> next = T_adjoint(GridFunction3D(s, std::move(wg))).values();
    for (std::size_t i = 0; i < next.size(); ++i) next[i] /= w[i];
    f = GridFunction3D(s, std::move(next));
  }
  return est;
}

NormEstimate shift_norm(const ShiftSpec& q, const GridFunction3D& w, std::uint64_t seed) {
  return weighted_operator_norm([&](const GridFunction3D& f) { return apply_shift(q, f, false); },
                                [&](const GridFunction3D& f) { return apply_shift(q, f, true); }, w, seed);
}

}  // namespace zyg
