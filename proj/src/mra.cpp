#include "zygmund/mra.hpp"

#include <cmath>

namespace zyg {

namespace {

std::int64_t stride_of(const Shape& s, int axis) {
  if (axis == 0) return s.n2() * s.n3();
  if (axis == 1) return s.n3();
  return 1;
}

// Calls fn(base) for the first cell of every line parallel to `axis`.
template <class Fn>
void for_each_line(const Shape& s, int axis, Fn&& fn) {
  const int a = (axis + 1) % 3, b = (axis + 2) % 3;
  const std::int64_t sa = stride_of(s, a), sb = stride_of(s, b);
  for (std::int64_t i = 0; i < s.n(a); ++i)
    for (std::int64_t j = 0; j < s.n(b); ++j) fn(i * sa + j * sb);
}

double inv_sqrt_len(int level) { return std::sqrt(std::ldexp(1.0, level)); }

void require_children(const Shape& s, int axis, const DyadicInterval& I) {
  if (I.level >= s.level(axis)) throw ResolutionError("interval has no children at grid resolution");
}

}  // namespace

std::vector<double> haar_1d(const ShiftedGrid& g, const DyadicInterval& J, int sig) {
  if (J.level > g.l_max()) throw ResolutionError("haar_1d: interval finer than the grid");
  if (sig == 1 && J.level >= g.l_max()) throw ResolutionError("haar_1d: cancellative Haar needs children");
  std::vector<double> v(static_cast<std::size_t>(std::int64_t{1} << g.l_max()), 0.0);
  const CellSpan sp = cell_span(g, J);
  const double val = inv_sqrt_len(J.level);
  for (std::int64_t t = 0; t < sp.length; ++t)
    v[static_cast<std::size_t>(sp.cell(t))] = (sig == 0 || t < sp.length / 2) ? val : -val;
  return v;
}

GridFunction3D tensor(const Shape& s, const std::vector<double>& x1, const std::vector<double>& x23) {
  if (x1.size() != static_cast<std::size_t>(s.n1()) || x23.size() != static_cast<std::size_t>(s.n2() * s.n3()))
    throw ShapeError("tensor: factor sizes do not match the shape");
  std::vector<double> v(s.size());
  const std::size_t m = x23.size();
  for (std::size_t i = 0; i < x1.size(); ++i)
    for (std::size_t j = 0; j < m; ++j) v[i * m + j] = x1[i] * x23[j];
  return GridFunction3D(s, std::move(v));
}

namespace {

std::vector<double> outer23(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> v(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) v[i * b.size() + j] = a[i] * b[j];
  return v;
}

}  // namespace

GridFunction3D haar3(const Shape& s, const Grids3& frame, const Rect3& box, const std::array<int, 3>& sig) {
  check_frame(s, frame);
  return tensor(s, haar_1d(frame.axis[0], box.axes[0], sig[0]),
                outer23(haar_1d(frame.axis[1], box.axes[1], sig[1]), haar_1d(frame.axis[2], box.axes[2], sig[2])));
}

GridFunction3D h_IZ(const Shape& s, const Grids3& frame, const ZygRectangle& I, int eta) {
  if (eta < 1 || eta > 3) throw std::invalid_argument("h_IZ: eta must be 1, 2 or 3");
  return haar3(s, frame, I.rect(), {1, eta2_of(eta), eta3_of(eta)});
}

GridFunction3D axis_op(const GridFunction3D& f, const Grids3& frame, int axis, const DyadicInterval& I, Op op) {
  const Shape& s = f.shape();
  check_frame(s, frame);
  if (op == Op::Delta) require_children(s, axis, I);
  const ShiftedGrid& g = frame.axis[static_cast<std::size_t>(axis)];
  const CellSpan sp = cell_span(g, I);
  const std::int64_t st = stride_of(s, axis);
  const auto& in = f.values();
  std::vector<double> out(s.size(), 0.0);
  std::vector<double> buf(static_cast<std::size_t>(sp.length));
  for_each_line(s, axis, [&](std::int64_t base) {
    for (std::int64_t t = 0; t < sp.length; ++t) buf[static_cast<std::size_t>(t)] = in[static_cast<std::size_t>(base + sp.cell(t) * st)];
    const double avg = pairwise_sum(buf) / static_cast<double>(sp.length);
    if (op == Op::E) {
      for (std::int64_t t = 0; t < sp.length; ++t) out[static_cast<std::size_t>(base + sp.cell(t) * st)] = avg;
    } else {
      const std::size_t h = static_cast<std::size_t>(sp.length / 2);
      const double l = pairwise_sum(std::span<const double>(buf.data(), h)) / static_cast<double>(h);
      const double r = pairwise_sum(std::span<const double>(buf.data() + h, h)) / static_cast<double>(h);
      for (std::int64_t t = 0; t < sp.length; ++t)
        out[static_cast<std::size_t>(base + sp.cell(t) * st)] = (t < sp.length / 2 ? l : r) - avg;
    }
  });
  return GridFunction3D(s, std::move(out));
}

GridFunction3D rect23_op(const GridFunction3D& f, const Grids3& frame, const DyadicInterval& I2,
                         const DyadicInterval& I3, Op op) {
  const GridFunction3D whole = axis_op(axis_op(f, frame, 2, I3, Op::E), frame, 1, I2, Op::E);
  if (op == Op::E) return whole;
  require_children(f.shape(), 1, I2);
  require_children(f.shape(), 2, I3);
  GridFunction3D acc = whole * -1.0;
  for (const auto& c2 : frame.axis[1].children(I2))
    for (const auto& c3 : frame.axis[2].children(I3))
      acc = acc + axis_op(axis_op(f, frame, 2, c3, Op::E), frame, 1, c2, Op::E);
  return acc;
}

namespace {

struct ChildBlocks {
  CellSpan sp[3];
  std::int64_t half[3];
  double sum[2][2][2];
  double count;
};

ChildBlocks child_blocks(const GridFunction3D& f, const Grids3& frame, const Rect3& I) {
  const Shape& s = f.shape();
  check_frame(s, frame);
  ChildBlocks cb{};
  for (int m = 0; m < 3; ++m) {
    require_children(s, m, I.axes[static_cast<std::size_t>(m)]);
    cb.sp[m] = cell_span(frame.axis[static_cast<std::size_t>(m)], I.axes[static_cast<std::size_t>(m)]);
    cb.half[m] = cb.sp[m].length / 2;
  }
  cb.count = static_cast<double>(cb.half[0] * cb.half[1] * cb.half[2]);
  const auto& v = f.values();
  std::vector<double> buf(static_cast<std::size_t>(cb.count));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        std::size_t k = 0;
        for (std::int64_t t1 = a * cb.half[0]; t1 < (a + 1) * cb.half[0]; ++t1) {
          const std::int64_t i1 = cb.sp[0].cell(t1);
          for (std::int64_t t2 = b * cb.half[1]; t2 < (b + 1) * cb.half[1]; ++t2) {
            const std::int64_t i2 = cb.sp[1].cell(t2);
            for (std::int64_t t3 = c * cb.half[2]; t3 < (c + 1) * cb.half[2]; ++t3)
              buf[k++] = v[s.index(i1, i2, cb.sp[2].cell(t3))];
          }
        }
        cb.sum[a][b][c] = pairwise_sum(buf);
      }
  return cb;
}

}  // namespace

std::array<double, 8> block_values(const GridFunction3D& f, const Grids3& frame, const Rect3& I, Op x1, Op x23) {
  const ChildBlocks cb = child_blocks(f, frame, I);
  double A[2][2][2], B[2][2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) A[a][b][c] = cb.sum[a][b][c] / cb.count;
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 2; ++c) {
      const double m = 0.5 * (A[0][b][c] + A[1][b][c]);
      for (int a = 0; a < 2; ++a) B[a][b][c] = (x1 == Op::E) ? m : A[a][b][c] - m;
    }
  std::array<double, 8> R{};
  for (int a = 0; a < 2; ++a) {
    const double m = 0.25 * (B[a][0][0] + B[a][0][1] + B[a][1][0] + B[a][1][1]);
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) R[static_cast<std::size_t>(4 * a + 2 * b + c)] = (x23 == Op::E) ? m : B[a][b][c] - m;
  }
  return R;
}

void block_op_accumulate(const GridFunction3D& f, const Grids3& frame, const Rect3& I, Op x1, Op x23,
                         double scale, std::vector<double>& out) {
  const Shape& s = f.shape();
  if (out.size() != s.size()) throw ShapeError("block_op_accumulate: output size mismatch");
  const auto R = block_values(f, frame, I, x1, x23);
  CellSpan sp[3];
  for (int m = 0; m < 3; ++m) sp[m] = cell_span(frame.axis[static_cast<std::size_t>(m)], I.axes[static_cast<std::size_t>(m)]);
  for (std::int64_t t1 = 0; t1 < sp[0].length; ++t1) {
    const int a = t1 < sp[0].length / 2 ? 0 : 1;
    const std::int64_t i1 = sp[0].cell(t1);
    for (std::int64_t t2 = 0; t2 < sp[1].length; ++t2) {
      const int b = t2 < sp[1].length / 2 ? 0 : 1;
      const std::int64_t i2 = sp[1].cell(t2);
      for (std::int64_t t3 = 0; t3 < sp[2].length; ++t3) {
        const int c = t3 < sp[2].length / 2 ? 0 : 1;
        out[s.index(i1, i2, sp[2].cell(t3))] += scale * R[static_cast<std::size_t>(4 * a + 2 * b + c)];
      }
    }
  }
}

GridFunction3D block_op(const GridFunction3D& f, const Grids3& frame, const Rect3& I, Op x1, Op x23) {
  std::vector<double> out(f.size(), 0.0);
  block_op_accumulate(f, frame, I, x1, x23, 1.0, out);
  return GridFunction3D(f.shape(), std::move(out));
}

GridFunction3D delta_Z(const GridFunction3D& f, const Grids3& frame, const ZygRectangle& I) {
  return block_op(f, frame, I.rect(), Op::Delta, Op::Delta);
}

std::array<double, 3> zyg_coeffs(const GridFunction3D& f, const Grids3& frame, const Rect3& I) {
  const ChildBlocks cb = child_blocks(f, frame, I);
  const int lv = I.axes[0].level + I.axes[1].level + I.axes[2].level;
  const double norm = std::sqrt(std::ldexp(1.0, lv)) * f.shape().cell_volume();
  std::array<double, 3> out{};
  for (int eta : kCancellativeEtas) {
    double acc = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          double sgn = a ? -1.0 : 1.0;
          if (eta2_of(eta) && b) sgn = -sgn;
          if (eta3_of(eta) && c) sgn = -sgn;
          acc += sgn * cb.sum[a][b][c];
        }
    out[static_cast<std::size_t>(eta - 1)] = acc * norm;
  }
  return out;
}

GridFunction3D level_E_axis(const GridFunction3D& f, const Grids3& frame, int axis, int level) {
  const Shape& s = f.shape();
  check_frame(s, frame);
  if (level < 0 || level > s.level(axis)) throw ResolutionError("level_E_axis: level out of range");
  const ShiftedGrid& g = frame.axis[static_cast<std::size_t>(axis)];
  const std::int64_t st = stride_of(s, axis);
  const std::int64_t len = g.length_units(level);
  const auto& in = f.values();
  std::vector<double> out(s.size());
  std::vector<double> buf(static_cast<std::size_t>(len));
  for_each_line(s, axis, [&](std::int64_t base) {
    for (std::int64_t m = 0; m < (std::int64_t{1} << level); ++m) {
      const CellSpan sp = cell_span(g, g.interval(level, m));
      for (std::int64_t t = 0; t < len; ++t) buf[static_cast<std::size_t>(t)] = in[static_cast<std::size_t>(base + sp.cell(t) * st)];
      const double avg = pairwise_sum(buf) / static_cast<double>(len);
      for (std::int64_t t = 0; t < len; ++t) out[static_cast<std::size_t>(base + sp.cell(t) * st)] = avg;
    }
  });
  return GridFunction3D(s, std::move(out));
}

GridFunction3D level_op1(const GridFunction3D& f, const Grids3& frame, int j1, Op op) {
  if (op == Op::E) return level_E_axis(f, frame, 0, j1);
  return level_E_axis(f, frame, 0, j1 + 1) - level_E_axis(f, frame, 0, j1);
}

GridFunction3D level_op23(const GridFunction3D& f, const Grids3& frame, int j2, int j3, Op op) {
  auto E = [&](int a, int b) { return level_E_axis(level_E_axis(f, frame, 2, b), frame, 1, a); };
  if (op == Op::E) return E(j2, j3);
  return E(j2 + 1, j3 + 1) - E(j2, j3);
}

bool has_children(const Shape& s, const Rect3& r) {
  return r.axes[0].level < s.l1 && r.axes[1].level < s.l2 && r.axes[2].level < s.l3;
}

std::vector<ZygRectangle> representable_zyg(const Shape& s, const Grids3& frame) {
  check_frame(s, frame);
  std::vector<ZygRectangle> out;
  if (s.l1 < 1 || s.l2 < 1) return out;
  for_each_rect(LatticeFamily{}, frame, {s.l1 - 1, s.l2 - 1, std::min(s.l3 - 1, s.l1 + s.l2 - 2)},
                [&](const Rect3& r) { out.emplace_back(r); });
  return out;
}

namespace {

void add_haar_local(std::vector<double>& out, const Shape& s, const Grids3& frame, const Rect3& I,
                    const std::array<int, 3>& sig, double scale) {
  CellSpan sp[3];
  for (int m = 0; m < 3; ++m) sp[m] = cell_span(frame.axis[static_cast<std::size_t>(m)], I.axes[static_cast<std::size_t>(m)]);
  const int lv = I.axes[0].level + I.axes[1].level + I.axes[2].level;
  const double val = scale * std::sqrt(std::ldexp(1.0, lv));
  for (std::int64_t t1 = 0; t1 < sp[0].length; ++t1) {
    const double s1 = (sig[0] && t1 >= sp[0].length / 2) ? -1.0 : 1.0;
    for (std::int64_t t2 = 0; t2 < sp[1].length; ++t2) {
      const double s2 = (sig[1] && t2 >= sp[1].length / 2) ? -s1 : s1;
      for (std::int64_t t3 = 0; t3 < sp[2].length; ++t3) {
        const double s3 = (sig[2] && t3 >= sp[2].length / 2) ? -s2 : s2;
        out[s.index(sp[0].cell(t1), sp[1].cell(t2), sp[2].cell(t3))] += s3 * val;
      }
    }
  }
}

}  // namespace

ZygExpansion expand_Z(const GridFunction3D& f, const Grids3& frame) {
  const Shape& s = f.shape();
  ZygExpansion e;
  e.shape = s;
  std::vector<double> sum(s.size(), 0.0);
  for (const auto& I : representable_zyg(s, frame)) {
    const auto c = zyg_coeffs(f, frame, I.rect());
    for (int eta : kCancellativeEtas) {
      const double v = c[static_cast<std::size_t>(eta - 1)];
      e.coeffs.push_back({I.rect(), eta, v});
      add_haar_local(sum, s, frame, I.rect(), {1, eta2_of(eta), eta3_of(eta)}, v);
    }
  }
  e.remainder = f - GridFunction3D(s, std::move(sum));
  return e;
}

GridFunction3D reconstruct(const ZygExpansion& e, const Grids3& frame) {
  std::vector<double> acc(e.remainder.values());
  for (const auto& c : e.coeffs) add_haar_local(acc, e.shape, frame, c.rect, {1, eta2_of(c.eta), eta3_of(c.eta)}, c.value);
  return GridFunction3D(e.shape, std::move(acc));
}

HFunction1D build_H(const ShiftedGrid& g, const DyadicInterval& I, const DyadicInterval& J, HVariant v) {
  if (I.level != J.level) throw ShapeError("build_H: side lengths differ");
  HFunction1D H{v, I, J, {}};
  switch (v) {
    case HVariant::ZeroIMinusZeroJ:
    case HVariant::ZeroJMinusZeroI: {
      auto a = haar_1d(g, I, 0);
      const auto b = haar_1d(g, J, 0);
      const double sg = v == HVariant::ZeroIMinusZeroJ ? 1.0 : -1.0;
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = sg * (a[i] - b[i]);
      H.values = std::move(a);
      break;
    }
    case HVariant::HaarI: H.values = haar_1d(g, I, 1); break;
    case HVariant::HaarJ: H.values = haar_1d(g, J, 1); break;
  }
  return H;
}

HFunction23 build_H(const ShiftedGrid& g2, const ShiftedGrid& g3, const std::array<DyadicInterval, 2>& I,
                    const std::array<DyadicInterval, 2>& J, HVariant v, int eta) {
  if (I[0].level != J[0].level || I[1].level != J[1].level) throw ShapeError("build_H: side lengths differ");
  if (eta < 1 || eta > 3) throw std::invalid_argument("build_H: eta must be 1, 2 or 3");
  HFunction23 H{v, I, J, eta, {}};
  auto h0 = [&](const std::array<DyadicInterval, 2>& R) { return outer23(haar_1d(g2, R[0], 0), haar_1d(g3, R[1], 0)); };
  auto h = [&](const std::array<DyadicInterval, 2>& R) {
    return outer23(haar_1d(g2, R[0], eta2_of(eta)), haar_1d(g3, R[1], eta3_of(eta)));
  };
  switch (v) {
    case HVariant::ZeroIMinusZeroJ:
    case HVariant::ZeroJMinusZeroI: {
      auto a = h0(I);
      const auto b = h0(J);
      const double sg = v == HVariant::ZeroIMinusZeroJ ? 1.0 : -1.0;
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = sg * (a[i] - b[i]);
      H.values = std::move(a);
      break;
    }
    case HVariant::HaarI: H.values = h(I); break;
    case HVariant::HaarJ: H.values = h(J); break;
  }
  return H;
}

}  // namespace zyg
