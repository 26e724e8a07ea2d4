#pragma once
// Shape corpus for isoperimetric checks: E = {g > 0}, all inside [-1.5, 1.5]^2.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "anisomt/grid.hpp"

namespace shapes {

using anisomt::Vec;

struct Shape {
  std::string name;
  std::function<double(const Vec&)> g;
};

inline double halfplanes(const Vec& x, const std::vector<Vec>& poly) {
  // convex polygon, counter-clockwise vertices
  double m = 1e300;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec& a = poly[i];
    const Vec& b = poly[(i + 1) % poly.size()];
    const double ex = b[0] - a[0], ey = b[1] - a[1], len = std::hypot(ex, ey);
    m = std::min(m, (ex * (x[1] - a[1]) - ey * (x[0] - a[0])) / len);
  }
  return m;
}

inline std::vector<Vec> regular(int k, double r, double phase = 0.0) {
  std::vector<Vec> v;
  for (int i = 0; i < k; ++i) {
    const double t = phase + 2 * std::numbers::pi * i / k;
    v.push_back(anisomt::vec2(r * std::cos(t), r * std::sin(t)));
  }
  return v;
}

inline double ellipse(const Vec& x, double a, double b, double rot) {
  const double c = std::cos(rot), s = std::sin(rot);
  const double u = c * x[0] + s * x[1], v = -s * x[0] + c * x[1];
  return 1.0 - std::sqrt(u * u / (a * a) + v * v / (b * b));
}

inline double star(const Vec& x, double amp, int k) {
  const double r = std::hypot(x[0], x[1]), th = std::atan2(x[1], x[0]);
  return 0.8 * (1 + amp * std::cos(k * th)) - r;
}

inline double disk(const Vec& x, double cx, double cy, double r) { return r - std::hypot(x[0] - cx, x[1] - cy); }

inline std::vector<Shape> corpus() {
  using anisomt::vec2;
  std::vector<Shape> s;
  s.push_back({"ellipse_2_1", [](const Vec& x) { return ellipse(x, 1.0, 0.5, 0.0); }});
  s.push_back({"ellipse_3_1_rot", [](const Vec& x) { return ellipse(x, 1.2, 0.4, 0.6); }});
  s.push_back({"ellipse_1_1.3", [](const Vec& x) { return ellipse(x, 0.8, 1.04, 0.2); }});
  s.push_back({"square", [](const Vec& x) { return halfplanes(x, regular(4, 1.0, std::numbers::pi / 4)); }});
  s.push_back({"diamond", [](const Vec& x) { return halfplanes(x, regular(4, 1.0)); }});
  s.push_back({"rectangle", [](const Vec& x) {
                 return halfplanes(x, {vec2(-1.2, -0.3), vec2(1.2, -0.3), vec2(1.2, 0.3), vec2(-1.2, 0.3)});
               }});
  s.push_back({"triangle", [](const Vec& x) { return halfplanes(x, regular(3, 1.0, 0.3)); }});
  s.push_back({"obtuse_triangle", [](const Vec& x) {
                 return halfplanes(x, {vec2(-1.2, -0.4), vec2(1.2, -0.4), vec2(-0.6, 0.5)});
               }});
  s.push_back({"hexagon", [](const Vec& x) { return halfplanes(x, regular(6, 1.0, 0.1)); }});
  s.push_back({"octagon", [](const Vec& x) { return halfplanes(x, regular(8, 1.0)); }});
  s.push_back({"star3", [](const Vec& x) { return star(x, 0.2, 3); }});
  s.push_back({"star5", [](const Vec& x) { return star(x, 0.3, 5); }});
  s.push_back({"star8", [](const Vec& x) { return star(x, 0.15, 8); }});
  s.push_back({"two_blobs", [](const Vec& x) { return std::max(disk(x, -0.5, 0, 0.5), disk(x, 0.5, 0.1, 0.4)); }});
  s.push_back({"three_blobs", [](const Vec& x) {
                 return std::max({disk(x, -0.6, -0.4, 0.4), disk(x, 0.5, -0.3, 0.5), disk(x, 0, 0.6, 0.35)});
               }});
  s.push_back({"l_shape", [](const Vec& x) {
                 return std::max(halfplanes(x, {vec2(-1, -1), vec2(1, -1), vec2(1, -0.4), vec2(-1, -0.4)}),
                                 halfplanes(x, {vec2(-1, -1), vec2(-0.4, -1), vec2(-0.4, 1), vec2(-1, 1)}));
               }});
  s.push_back({"annulus", [](const Vec& x) { return std::min(disk(x, 0, 0, 1.0), -disk(x, 0, 0, 0.4)); }});
  s.push_back({"superellipse", [](const Vec& x) {
                 return 1.0 - std::pow(std::pow(std::abs(x[0]), 4) + std::pow(std::abs(x[1] / 0.7), 4), 0.25);
               }});
  s.push_back({"stadium", [](const Vec& x) {
                 const double cx = std::clamp(x[0], -0.6, 0.6);
                 return 0.5 - std::hypot(x[0] - cx, x[1]);
               }});
  s.push_back({"crescent", [](const Vec& x) { return std::min(disk(x, 0, 0, 1.0), -disk(x, 0.5, 0.2, 0.7)); }});
  return s;
}

inline anisomt::GridFunction sample(const Shape& s, double h) {
  auto u = anisomt::GridFunction::on_domain(anisomt::Domain::square(3.2), h);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = s.g(u.mesh().point(i));
  return u;
}

}  // namespace shapes
