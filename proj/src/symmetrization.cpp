#include "anisomt/symmetrization.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "anisomt/error.hpp"

namespace anisomt {

double Rearrangement::operator()(double t) const {
  if (t < 0.0 || sorted.empty()) return sorted.empty() ? 0.0 : sorted.front();
  const double k = std::floor(t / cell);
  if (k >= double(sorted.size())) return 0.0;
  return sorted[std::size_t(k)];
}

double Rearrangement::distribution(double s) const {
  // sorted is decreasing: count entries > s
  auto it = std::partition_point(sorted.begin(), sorted.end(), [s](double v) { return v > s; });
  return cell * double(it - sorted.begin());
}

double Rearrangement::integral() const {
  double s = 0.0;
  for (double v : sorted) s += v;
  return s * cell;
}

Rearrangement decreasing_rearrangement(const GridFunction& u) {
  Rearrangement r;
  r.cell = u.mesh().cell_measure();
  r.sorted.reserve(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.mask()[i]) r.sorted.push_back(std::abs(u[i]));
  std::sort(r.sorted.begin(), r.sorted.end(), std::greater<>());
  return r;
}

GridFunction convex_symmetrize(const GridFunction& u, const FinslerNorm& norm) {
  const Mesh& src = u.mesh();
  const int n = src.dim;
  if (norm.dim() != n) throw Error(Errc::invalid_argument, "norm and grid dimensions differ");
  const Rearrangement r = decreasing_rearrangement(u);
  const double kap = kappa_n(norm);
  const double radius = std::pow(r.total_measure() / kap, 1.0 / n);
  // origin-centered: node 0 sits at a mesh point
  Mesh m;
  m.dim = n;
  m.h = src.h;
  const int pad = 2;
  for (int d = 0; d < n; ++d) {
    Vec e{};
    e[d] = 1.0;
    const int half = int(std::ceil(radius * norm.F(e) / m.h - 1e-9)) + pad;
    m.n[d] = 2 * half + 1;
    m.origin[d] = -half * m.h;
  }
  std::vector<std::uint8_t> mask(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) mask[i] = norm.polar(m.point(i)) < radius ? 1 : 0;
  GridFunction out(m, std::move(mask));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out.mask()[i]) continue;
    out[i] = r(kap * std::pow(norm.polar(m.point(i)), n));
  }
  return out;
}

namespace {

struct P2 {
  double x, y;
};

double shoelace(const P2* p, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    const P2& a = p[i];
    const P2& b = p[(i + 1) % k];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * std::abs(s);
}

// F(nu) * |AB| with nu the normal of AB pointing away from `inside_ref` when
// `toward` is false, toward it otherwise.
double segment_weight(const FinslerNorm& f, P2 a, P2 b, P2 ref, bool ref_inside) {
  Vec nu = vec2(b.y - a.y, -(b.x - a.x));
  if (nu[0] == 0.0 && nu[1] == 0.0) return 0.0;
  const double side = nu[0] * (ref.x - 0.5 * (a.x + b.x)) + nu[1] * (ref.y - 0.5 * (a.y + b.y));
  // outward normal points away from the inside
  if ((side > 0.0) == ref_inside) nu = vec2(-nu[0], -nu[1]);
  return f.F(nu);
}

}  // namespace

PerimeterResult anisotropic_perimeter(const GridFunction& u, double t, const FinslerNorm& norm) {
  const Mesh& m = u.mesh();
  if (m.dim != 2 || norm.dim() != 2) throw Error(Errc::unsupported_dimension, "perimeter is 2D only");
  PerimeterResult res;
  bool any = false;
  for (std::size_t i = 0; i < u.size() && !any; ++i) any = u[i] > t;
  if (!any) {
    res.empty_set = true;
    return res;
  }
  const double h = m.h;
  for (int j = 0; j + 1 < m.n[1]; ++j)
    for (int i = 0; i + 1 < m.n[0]; ++i) {
      const double v[4] = {u[m.index(i, j)], u[m.index(i + 1, j)], u[m.index(i + 1, j + 1)],
                           u[m.index(i, j + 1)]};
      const Vec o = m.point(i, j);
      const P2 c[4] = {{o[0], o[1]}, {o[0] + h, o[1]}, {o[0] + h, o[1] + h}, {o[0], o[1] + h}};
      bool in[4];
      int code = 0;
      for (int k = 0; k < 4; ++k) {
        in[k] = v[k] > t;
        code |= int(in[k]) << k;
      }
      if (code == 0) continue;
      if (code == 15) {
        res.area += h * h;
        continue;
      }
      // crossing on edge k (corner k -> k+1)
      P2 x[4];
      for (int k = 0; k < 4; ++k) {
        const int k1 = (k + 1) & 3;
        if (in[k] == in[k1]) continue;
        const double s = (t - v[k]) / (v[k1] - v[k]);
        x[k] = {c[k].x + s * (c[k1].x - c[k].x), c[k].y + s * (c[k1].y - c[k].y)};
      }
      const bool saddle = code == 5 || code == 10;
      const double mean = 0.25 * (v[0] + v[1] + v[2] + v[3]);
      if (saddle && !(mean > t)) {
        // two separate inside corners, each cut off by its own segment
        for (int k = 0; k < 4; ++k) {
          if (!in[k]) continue;
          const int prev = (k + 3) & 3;
          const P2 tri[3] = {c[k], x[k], x[prev]};
          res.area += shoelace(tri, 3);
          res.perimeter += segment_weight(norm, x[prev], x[k], c[k], true);
          ++res.segments;
        }
        continue;
      }
      // boundary walk gives the inside polygon (hexagon for a joined saddle)
      P2 poly[8];
      int np = 0;
      for (int k = 0; k < 4; ++k) {
        if (in[k]) poly[np++] = c[k];
        if (in[k] != in[(k + 1) & 3]) poly[np++] = x[k];
      }
      res.area += shoelace(poly, np);
      if (saddle) {
        for (int k = 0; k < 4; ++k) {
          if (in[k]) continue;
          const int prev = (k + 3) & 3;
          res.perimeter += segment_weight(norm, x[prev], x[k], c[k], false);
          ++res.segments;
        }
      } else {
        int e0 = -1, e1 = -1, ref = -1;
        for (int k = 0; k < 4; ++k) {
          if (in[k] != in[(k + 1) & 3]) (e0 < 0 ? e0 : e1) = k;
          if (in[k] && ref < 0) ref = k;
        }
        res.perimeter += segment_weight(norm, x[e0], x[e1], c[ref], true);
        ++res.segments;
      }
    }
  return res;
}

IsoperimetricResult isoperimetric_ratio(const GridFunction& u, double t, const FinslerNorm& norm) {
  IsoperimetricResult r;
  r.set = anisotropic_perimeter(u, t, norm);
  if (r.set.empty_set || r.set.area <= 0.0) throw Error(Errc::invalid_argument, "isoperimetric_ratio: empty set");
  const double n = 2.0;
  r.ratio = r.set.perimeter / (n * std::pow(kappa_n(norm), 1.0 / n) * std::pow(r.set.area, 1.0 - 1.0 / n));
  return r;
}

CoareaReport coarea_check(const GridFunction& u, const FinslerNorm& norm, int levels) {
  const Mesh& m = u.mesh();
  if (m.dim != 2) throw Error(Errc::unsupported_dimension, "coarea_check is 2D only");
  if (levels < 1) throw Error(Errc::invalid_argument, "levels must be positive");
  CoareaReport rep;
  rep.levels = levels;
  const double ih2 = 0.5 / m.h, hn = m.cell_measure();
  double umax = 0.0;
  for (int j = 1; j + 1 < m.n[1]; ++j)
    for (int i = 1; i + 1 < m.n[0]; ++i) {
      const Vec g = vec2((u[m.index(i + 1, j)] - u[m.index(i - 1, j)]) * ih2,
                         (u[m.index(i, j + 1)] - u[m.index(i, j - 1)]) * ih2);
      rep.gradient_integral += norm.F(g) * hn;
    }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] < 0.0) throw Error(Errc::invalid_argument, "coarea_check expects u >= 0");
    umax = std::max(umax, u[i]);
  }
  if (umax > 0.0) {
    const double t0 = 1e-12 * umax;
    const double dt = (umax - t0) / levels;
    for (int k = 0; k <= levels; ++k) {
      const double w = (k == 0 || k == levels) ? 0.5 : 1.0;
      rep.level_integral += w * dt * anisotropic_perimeter(u, t0 + k * dt, norm).perimeter;
    }
  }
  const double big = std::max(rep.gradient_integral, rep.level_integral);
  rep.discrepancy = big > 0.0 ? std::abs(rep.gradient_integral - rep.level_integral) / big : 0.0;
  return rep;
}

}  // namespace anisomt
