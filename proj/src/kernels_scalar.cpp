#include <algorithm>
#include <cmath>

#include "anisomt/kernels.hpp"

namespace anisomt::kernels {

namespace {

// q^{(n-2)/2}
inline double power_factor(double q, int n) {
  double f = (n % 2) ? std::sqrt(q) : 1.0;
  for (int k = 0; k < (n - 2) / 2; ++k) f *= q;
  return f;
}

double cells_row_scalar(const double* u0, const double* u1, std::size_t ncells, const QuadParams& p,
                        double* fb, double* ft, double* fl, double* fr) {
  const double b11 = p.a11 + p.eps2, b22 = p.a22 + p.eps2, b12 = p.a12;
  double acc = 0.0;
  for (std::size_t i = 0; i < ncells; ++i) {
    const double xb = (u0[i + 1] - u0[i]) * p.inv_h;
    const double xt = (u1[i + 1] - u1[i]) * p.inv_h;
    const double yl = (u1[i] - u0[i]) * p.inv_h;
    const double yr = (u1[i + 1] - u0[i + 1]) * p.inv_h;
    // corners: (xb,yl) (xb,yr) (xt,yl) (xt,yr)
    const double gx[4] = {xb, xb, xt, xt};
    const double gy[4] = {yl, yr, yl, yr};
    double e = 0.0;
    double dx[4], dy[4];
    for (int c = 0; c < 4; ++c) {
      const double ax = b11 * gx[c] + b12 * gy[c];
      const double ay = b12 * gx[c] + b22 * gy[c];
      const double q = gx[c] * ax + gy[c] * ay;
      const double f = power_factor(q, p.n);
      e += q * f;
      const double s = 0.25 * p.n * f;
      dx[c] = s * ax;
      dy[c] = s * ay;
    }
    acc += 0.25 * e;
    if (fb) {
      fb[i] = dx[0] + dx[1];
      ft[i] = dx[2] + dx[3];
      fl[i] = dy[0] + dy[2];
      fr[i] = dy[1] + dy[3];
    }
  }
  return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double t, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += t * x[i];
}

void dir_update_scalar(double beta, const double* g, double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) p[i] = -g[i] + beta * p[i];
}

double max_abs_scalar(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

}  // namespace

const Table& scalar() {
  static const Table t{cells_row_scalar, dot_scalar, axpy_scalar, dir_update_scalar, max_abs_scalar,
                       "scalar"};
  return t;
}

}  // namespace anisomt::kernels
