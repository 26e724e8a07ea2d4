#pragma once

#include <array>
#include <cmath>

namespace anisomt {

inline constexpr int kMaxDim = 4;

// Fixed-capacity point/vector; components past the active dimension stay zero.
using Vec = std::array<double, kMaxDim>;

inline double dot(const Vec& a, const Vec& b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a, int n) { return std::sqrt(dot(a, a, n)); }

inline Vec scaled(const Vec& a, double t) {
  Vec r{};
  for (int i = 0; i < kMaxDim; ++i) r[i] = t * a[i];
  return r;
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec r{};
  for (int i = 0; i < kMaxDim; ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r{};
  for (int i = 0; i < kMaxDim; ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec vec2(double x, double y) { return Vec{x, y, 0.0, 0.0}; }
inline Vec vec3(double x, double y, double z) { return Vec{x, y, z, 0.0}; }

}  // namespace anisomt
