#include "anisomt/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace anisomt {

WulffBall::WulffBall(FinslerNorm f, double r, Vec c)
    : norm(std::move(f)), radius(r), center(c), kappa(kappa_n(norm)) {}

bool WulffBall::contains(const Vec& x) const { return norm.polar(sub(x, center)) <= radius; }

double WulffBall::measure() const { return kappa * std::pow(radius, norm.dim()); }

Domain Domain::disk(double radius, int dim, Vec center) {
  Domain d;
  d.kind = DomainKind::disk;
  d.dim = dim;
  d.scale = radius;
  d.center = center;
  return d;
}

Domain Domain::square(double side, int dim, Vec center) {
  Domain d;
  d.kind = DomainKind::square;
  d.dim = dim;
  d.scale = side;
  d.center = center;
  return d;
}

Domain Domain::polygon(std::vector<Vec> verts, double scale) {
  if (verts.size() < 3) throw Error(Errc::invalid_argument, "polygon needs >= 3 vertices");
  Domain d;
  d.kind = DomainKind::polygon;
  d.dim = 2;
  d.scale = scale;
  d.vertices = std::move(verts);
  return d;
}

Domain Domain::wulff(const FinslerNorm& f, double radius, Vec center) {
  Domain d;
  d.kind = DomainKind::wulff;
  d.dim = f.dim();
  d.scale = radius;
  d.center = center;
  d.norm = f;
  return d;
}

bool Domain::contains(const Vec& x) const {
  switch (kind) {
    case DomainKind::disk: return norm2(sub(x, center), dim) < scale;
    case DomainKind::square:
      for (int i = 0; i < dim; ++i)
        if (std::abs(x[i] - center[i]) >= 0.5 * scale) return false;
      return true;
    case DomainKind::wulff: return norm->polar(sub(x, center)) < scale;
    case DomainKind::polygon: {
      bool inside = false;
      const std::size_t m = vertices.size();
      for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
        double xi = scale * vertices[i][0], yi = scale * vertices[i][1];
        double xj = scale * vertices[j][0], yj = scale * vertices[j][1];
        if ((yi > x[1]) != (yj > x[1]) && x[0] < (xj - xi) * (x[1] - yi) / (yj - yi) + xi)
          inside = !inside;
      }
      return inside;
    }
  }
  return false;
}

std::pair<Vec, Vec> Domain::bounding_box() const {
  Vec lo{}, hi{};
  switch (kind) {
    case DomainKind::disk:
    case DomainKind::square: {
      double r = kind == DomainKind::disk ? scale : 0.5 * scale;
      for (int i = 0; i < dim; ++i) lo[i] = center[i] - r, hi[i] = center[i] + r;
      break;
    }
    case DomainKind::wulff: {
      // Extent along e_i of {F° <= r} is r * F(e_i).
      for (int i = 0; i < dim; ++i) {
        Vec e{};
        e[i] = 1.0;
        double r = scale * norm->F(e);
        lo[i] = center[i] - r;
        hi[i] = center[i] + r;
      }
      break;
    }
    case DomainKind::polygon: {
      lo = vec2(1e300, 1e300);
      hi = vec2(-1e300, -1e300);
      for (const Vec& v : vertices)
        for (int i = 0; i < 2; ++i) {
          lo[i] = std::min(lo[i], scale * v[i]);
          hi[i] = std::max(hi[i], scale * v[i]);
        }
      break;
    }
  }
  return {lo, hi};
}

double Domain::measure() const {
  switch (kind) {
    case DomainKind::disk:
      return dim == 2 ? std::numbers::pi * scale * scale
                      : 4.0 / 3.0 * std::numbers::pi * scale * scale * scale;
    case DomainKind::square: return std::pow(scale, dim);
    case DomainKind::wulff: return kappa_n(*norm) * std::pow(scale, dim);
    case DomainKind::polygon: {
      double s = 0.0;
      const std::size_t m = vertices.size();
      for (std::size_t i = 0; i < m; ++i) {
        const Vec& a = vertices[i];
        const Vec& b = vertices[(i + 1) % m];
        s += a[0] * b[1] - a[1] * b[0];
      }
      return 0.5 * std::abs(s) * scale * scale;
    }
  }
  return 0.0;
}

Domain Domain::scaled_by(double s) const {
  Domain d = *this;
  d.scale *= s;
  d.center = scaled(center, s);
  return d;
}

std::string Domain::describe() const {
  const char* names[] = {"disk", "square", "polygon", "wulff"};
  return fmt::format("{}(dim={}, scale={})", names[static_cast<int>(kind)], dim, scale);
}

std::array<int, 3> Mesh::coords(std::size_t idx) const {
  std::array<int, 3> c{};
  c[0] = static_cast<int>(idx % n[0]);
  idx /= n[0];
  c[1] = static_cast<int>(idx % n[1]);
  c[2] = static_cast<int>(idx / n[1]);
  return c;
}

Vec Mesh::point(int i, int j, int k) const {
  Vec p{};
  p[0] = origin[0] + i * h;
  p[1] = origin[1] + j * h;
  if (dim == 3) p[2] = origin[2] + k * h;
  return p;
}

Vec Mesh::point(std::size_t idx) const {
  auto c = coords(idx);
  return point(c[0], c[1], c[2]);
}

double Mesh::cell_measure() const { return std::pow(h, dim); }

Mesh Mesh::covering(const Vec& lo, const Vec& hi, double h, int dim, int pad) {
  if (!(h > 0.0)) throw Error(Errc::invalid_argument, "mesh spacing must be positive");
  if (dim != 2 && dim != 3) throw Error(Errc::unsupported_dimension, "grids are 2D or 3D");
  Mesh m;
  m.dim = dim;
  m.h = h;
  for (int d = 0; d < dim; ++d) {
    int cells = static_cast<int>(std::ceil((hi[d] - lo[d]) / h - 1e-9));
    m.n[d] = cells + 2 * pad + 1;
    m.origin[d] = lo[d] - pad * h;
  }
  return m;
}

GridFunction::GridFunction(Mesh mesh, std::vector<std::uint8_t> mask)
    : mesh_(mesh), values_(mesh.size(), 0.0), mask_(std::move(mask)) {
  if (mask_.size() != mesh_.size()) throw Error(Errc::invalid_argument, "mask size mismatch");
}

GridFunction GridFunction::on_domain(const Domain& dom, double h, int pad) {
  auto [lo, hi] = dom.bounding_box();
  Mesh m = Mesh::covering(lo, hi, h, dom.dim, pad);
  std::vector<std::uint8_t> mask(m.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) mask[i] = dom.contains(m.point(i)) ? 1 : 0;
  return GridFunction(m, std::move(mask));
}

GridFunction GridFunction::zeros_like() const {
  GridFunction g = *this;
  std::fill(g.values_.begin(), g.values_.end(), 0.0);
  return g;
}

void GridFunction::fill(const std::function<double(const Vec&)>& f) {
  for (std::size_t i = 0; i < values_.size(); ++i)
    values_[i] = mask_[i] ? f(mesh_.point(i)) : 0.0;
}

void GridFunction::apply_mask() {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!mask_[i]) values_[i] = 0.0;
}

double GridFunction::mask_measure() const {
  return static_cast<double>(std::count(mask_.begin(), mask_.end(), 1)) * mesh_.cell_measure();
}

double GridFunction::lp_norm(double p) const {
  double s = 0.0;
  if (p == 2.0)
    for (double v : values_) s += v * v;
  else
    for (double v : values_) s += std::pow(std::abs(v), p);
  return std::pow(s * mesh_.cell_measure(), 1.0 / p);
}

double GridFunction::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * mesh_.cell_measure();
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::size_t GridFunction::argmax() const {
  return static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) - values_.begin());
}

double GridFunction::interpolate(const Vec& x) const {
  const int d = mesh_.dim;
  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  for (int a = 0; a < d; ++a) {
    double s = (x[a] - mesh_.origin[a]) / mesh_.h;
    int i = static_cast<int>(std::floor(s));
    if (i < 0 || i >= mesh_.n[a] - 1) {
      if (i == mesh_.n[a] - 1 && s == i) {
        i -= 1;
      } else {
        return 0.0;
      }
    }
    base[a] = i;
    frac[a] = s - i;
  }
  double acc = 0.0;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::array<int, 3> ix{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      int bit = (c >> a) & 1;
      ix[a] = base[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (w != 0.0) acc += w * values_[mesh_.index(ix[0], ix[1], ix[2])];
  }
  return acc;
}

void GridFunction::write_csv(std::ostream& os) const {
  const Mesh& m = mesh_;
  if (m.dim == 2) {
    os << "nx,ny,h,origin_x,origin_y\n";
    os << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", m.n[0], m.n[1], m.h, m.origin[0], m.origin[1]);
  } else {
    os << "nx,ny,nz,h,origin_x,origin_y,origin_z\n";
    os << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", m.n[0], m.n[1], m.n[2], m.h,
                      m.origin[0], m.origin[1], m.origin[2]);
  }
  const std::size_t rows = m.size() / m.n[0];
  for (std::size_t r = 0; r < rows; ++r) {
    std::string line;
    for (int i = 0; i < m.n[0]; ++i) {
      if (i) line += ',';
      line += fmt::format("{:.17g}", values_[r * m.n[0] + i]);
    }
    line += '\n';
    os << line;
  }
}

namespace {
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}
}  // namespace

// Mask is not stored in CSV; nonzero entries are taken as the mask.
GridFunction GridFunction::read_csv(std::istream& is) {
  std::string header, meta;
  if (!std::getline(is, header) || !std::getline(is, meta))
    throw Error(Errc::io_error, "truncated grid CSV");
  auto h = split_csv(header);
  auto v = split_csv(meta);
  if (h.size() != v.size() || (h.size() != 5 && h.size() != 7))
    throw Error(Errc::io_error, "bad grid CSV header");
  Mesh m;
  m.dim = h.size() == 5 ? 2 : 3;
  for (int d = 0; d < m.dim; ++d) m.n[d] = std::stoi(v[d]);
  m.h = std::stod(v[m.dim]);
  for (int d = 0; d < m.dim; ++d) m.origin[d] = std::stod(v[m.dim + 1 + d]);
  std::vector<double> vals;
  vals.reserve(m.size());
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    for (auto& t : split_csv(line)) vals.push_back(std::stod(t));
  }
  if (vals.size() != m.size()) throw Error(Errc::io_error, "grid CSV value count mismatch");
  std::vector<std::uint8_t> mask(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) mask[i] = vals[i] != 0.0;
  GridFunction g(m, std::move(mask));
  std::copy(vals.begin(), vals.end(), g.values_.begin());
  return g;
}

namespace {
template <class T>
void put_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get_le(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error(Errc::io_error, "truncated GFN1 stream");
  return v;
}
}  // namespace

// "GFN1", u32 dim, u32 nx, ny, nz, f64 h, f64 origin[3], f64 values[], u8 mask[].
void GridFunction::write_binary(std::ostream& os) const {
  os.write("GFN1", 4);
  put_le<std::uint32_t>(os, mesh_.dim);
  for (int d = 0; d < 3; ++d) put_le<std::uint32_t>(os, mesh_.n[d]);
  put_le<double>(os, mesh_.h);
  for (int d = 0; d < 3; ++d) put_le<double>(os, mesh_.origin[d]);
  for (double v : values_) put_le<double>(os, v);
  os.write(reinterpret_cast<const char*>(mask_.data()), static_cast<std::streamsize>(mask_.size()));
}

GridFunction GridFunction::read_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "GFN1", 4) != 0)
    throw Error(Errc::io_error, "missing GFN1 magic");
  Mesh m;
  m.dim = static_cast<int>(get_le<std::uint32_t>(is));
  for (int d = 0; d < 3; ++d) m.n[d] = static_cast<int>(get_le<std::uint32_t>(is));
  m.h = get_le<double>(is);
  for (int d = 0; d < 3; ++d) m.origin[d] = get_le<double>(is);
  std::vector<double> vals(m.size());
  for (double& v : vals) v = get_le<double>(is);
  std::vector<std::uint8_t> mask(m.size());
  if (!is.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(mask.size())))
    throw Error(Errc::io_error, "truncated GFN1 mask");
  GridFunction g(m, std::move(mask));
  std::copy(vals.begin(), vals.end(), g.values_.begin());
  return g;
}

}  // namespace anisomt
