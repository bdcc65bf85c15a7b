#include "zygmund/grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace zyg {

double Shape::cell_volume() const { return std::ldexp(1.0, -(l1 + l2 + l3)); }

Grids3 standard_frame(const Shape& s) { return Grids3::standard(s.l1, s.l2, s.l3); }

void check_frame(const Shape& s, const Grids3& frame) {
  for (int m = 0; m < 3; ++m)
    if (frame.axis[static_cast<std::size_t>(m)].l_max() != s.level(m))
      throw std::invalid_argument("frame resolution does not match the grid shape");
}

CellSpan cell_span(const ShiftedGrid& g, const DyadicInterval& I) {
  CellSpan s;
  s.start = g.left_units(I);
  s.length = g.length_units(I.level);
  s.mask = (std::int64_t{1} << g.l_max()) - 1;
  return s;
}

GridFunction3D::GridFunction3D(Shape shape, std::vector<double> values) : shape_(shape), v_(std::move(values)) {
  if (shape.l1 < 0 || shape.l2 < 0 || shape.l3 < 0) throw std::invalid_argument("GridFunction3D: negative level");
  if (v_.size() != shape_.size()) throw std::invalid_argument("GridFunction3D: value count does not match shape");
}

GridFunction3D GridFunction3D::zeros(Shape shape) { return GridFunction3D(shape, std::vector<double>(shape.size(), 0.0)); }

GridFunction3D GridFunction3D::constant(Shape shape, double c) {
  return GridFunction3D(shape, std::vector<double>(shape.size(), c));
}

GridFunction3D GridFunction3D::from_cells(Shape shape,
                                          const std::function<double(std::int64_t, std::int64_t, std::int64_t)>& f) {
  std::vector<double> v(shape.size());
  for (std::int64_t a = 0; a < shape.n1(); ++a)
    for (std::int64_t b = 0; b < shape.n2(); ++b)
      for (std::int64_t c = 0; c < shape.n3(); ++c) v[shape.index(a, b, c)] = f(a, b, c);
  return GridFunction3D(shape, std::move(v));
}

GridFunction3D GridFunction3D::operator+(const GridFunction3D& o) const {
  if (!(shape_ == o.shape_)) throw std::invalid_argument("shape mismatch");
  std::vector<double> v(v_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v_[i];
  return GridFunction3D(shape_, std::move(v));
}

GridFunction3D GridFunction3D::operator-(const GridFunction3D& o) const {
  if (!(shape_ == o.shape_)) throw std::invalid_argument("shape mismatch");
  std::vector<double> v(v_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v_[i];
  return GridFunction3D(shape_, std::move(v));
}

GridFunction3D GridFunction3D::operator*(double c) const {
  std::vector<double> v(v_);
  for (auto& x : v) x *= c;
  return GridFunction3D(shape_, std::move(v));
}

GridFunction3D GridFunction3D::abs() const {
  std::vector<double> v(v_);
  for (auto& x : v) x = std::fabs(x);
  return GridFunction3D(shape_, std::move(v));
}

double GridFunction3D::integral() const { return pairwise_sum(v_) * shape_.cell_volume(); }

double GridFunction3D::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::fabs(x));
  return m;
}

namespace {

void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((x >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64_le(const std::uint8_t* p) {
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return x;
}

}  // namespace

// Layout: u64 header length, JSON header bytes, then doubles as u64 little-endian.
std::vector<std::uint8_t> GridFunction3D::to_bytes() const {
  const nlohmann::json header = {{"format", "gridfunction3d"},
                                 {"levels", {shape_.l1, shape_.l2, shape_.l3}},
                                 {"layout", "row-major(x1,x2,x3)"},
                                 {"dtype", "float64-le"},
                                 {"count", v_.size()}};
  const std::string h = header.dump();
  std::vector<std::uint8_t> out;
  out.reserve(8 + h.size() + 8 * v_.size());
  put_u64_le(out, h.size());
  out.insert(out.end(), h.begin(), h.end());
  for (double x : v_) put_u64_le(out, std::bit_cast<std::uint64_t>(x));
  return out;
}

GridFunction3D GridFunction3D::from_bytes(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8) throw std::runtime_error("GridFunction3D: truncated header");
  const std::uint64_t hlen = get_u64_le(bytes.data());
  if (bytes.size() < 8 + hlen) throw std::runtime_error("GridFunction3D: truncated header");
  const auto header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(hlen));
  if (header.at("format") != "gridfunction3d") throw std::runtime_error("GridFunction3D: unknown format");
  const auto lv = header.at("levels");
  const Shape s{lv.at(0).get<int>(), lv.at(1).get<int>(), lv.at(2).get<int>()};
  const std::size_t count = header.at("count").get<std::size_t>();
  if (count != s.size() || bytes.size() != 8 + hlen + 8 * count)
    throw std::runtime_error("GridFunction3D: payload size mismatch");
  std::vector<double> v(count);
  const std::uint8_t* p = bytes.data() + 8 + hlen;
  for (std::size_t i = 0; i < count; ++i) v[i] = std::bit_cast<double>(get_u64_le(p + 8 * i));
  return GridFunction3D(s, std::move(v));
}

void GridFunction3D::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  const auto b = to_bytes();
  os.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

GridFunction3D GridFunction3D::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path + " for reading");
  std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return from_bytes(b);
}

double inner(const GridFunction3D& f, const GridFunction3D& g) {
  if (!(f.shape() == g.shape())) throw std::invalid_argument("inner: shape mismatch");
  return pairwise_dot(f.values(), g.values()) * f.shape().cell_volume();
}

double norm2(const GridFunction3D& f) { return std::sqrt(inner(f, f)); }

double max_abs_diff(const GridFunction3D& f, const GridFunction3D& g) { return (f - g).max_abs(); }

GridFunction3D random_grid(Shape shape, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(shape.size());
  for (auto& x : v) x = u(rng);
  return GridFunction3D(shape, std::move(v));
}

}  // namespace zyg
