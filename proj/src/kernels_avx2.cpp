// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "anisomt/kernels.hpp"

namespace anisomt::kernels {

namespace {

inline __m256d power_factor(__m256d q, int n) {
  __m256d f = (n % 2) ? _mm256_sqrt_pd(q) : _mm256_set1_pd(1.0);
  for (int k = 0; k < (n - 2) / 2; ++k) f = _mm256_mul_pd(f, q);
  return f;
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double cells_row_avx2(const double* u0, const double* u1, std::size_t ncells, const QuadParams& p,
                      double* fb, double* ft, double* fl, double* fr) {
  const __m256d b11 = _mm256_set1_pd(p.a11 + p.eps2);
  const __m256d b22 = _mm256_set1_pd(p.a22 + p.eps2);
  const __m256d b12 = _mm256_set1_pd(p.a12);
  const __m256d ih = _mm256_set1_pd(p.inv_h);
  const __m256d sc = _mm256_set1_pd(0.25 * p.n);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= ncells; i += 4) {
    const __m256d a0 = _mm256_loadu_pd(u0 + i), a1 = _mm256_loadu_pd(u0 + i + 1);
    const __m256d c0 = _mm256_loadu_pd(u1 + i), c1 = _mm256_loadu_pd(u1 + i + 1);
    const __m256d xb = _mm256_mul_pd(_mm256_sub_pd(a1, a0), ih);
    const __m256d xt = _mm256_mul_pd(_mm256_sub_pd(c1, c0), ih);
    const __m256d yl = _mm256_mul_pd(_mm256_sub_pd(c0, a0), ih);
    const __m256d yr = _mm256_mul_pd(_mm256_sub_pd(c1, a1), ih);
    const __m256d gx[4] = {xb, xb, xt, xt};
    const __m256d gy[4] = {yl, yr, yl, yr};
    __m256d e = _mm256_setzero_pd();
    __m256d dx[4], dy[4];
    for (int c = 0; c < 4; ++c) {
      const __m256d ax = _mm256_fmadd_pd(b11, gx[c], _mm256_mul_pd(b12, gy[c]));
      const __m256d ay = _mm256_fmadd_pd(b12, gx[c], _mm256_mul_pd(b22, gy[c]));
      const __m256d q = _mm256_fmadd_pd(gx[c], ax, _mm256_mul_pd(gy[c], ay));
      const __m256d f = power_factor(q, p.n);
      e = _mm256_fmadd_pd(q, f, e);
      const __m256d s = _mm256_mul_pd(sc, f);
      dx[c] = _mm256_mul_pd(s, ax);
      dy[c] = _mm256_mul_pd(s, ay);
    }
    acc = _mm256_fmadd_pd(_mm256_set1_pd(0.25), e, acc);
    if (fb) {
      _mm256_storeu_pd(fb + i, _mm256_add_pd(dx[0], dx[1]));
      _mm256_storeu_pd(ft + i, _mm256_add_pd(dx[2], dx[3]));
      _mm256_storeu_pd(fl + i, _mm256_add_pd(dy[0], dy[2]));
      _mm256_storeu_pd(fr + i, _mm256_add_pd(dy[1], dy[3]));
    }
  }
  double total = hsum(acc);
  if (i < ncells)
    total += scalar().cells_row(u0 + i, u1 + i, ncells - i, p, fb ? fb + i : nullptr,
                                ft ? ft + i : nullptr, fl ? fl + i : nullptr, fr ? fr + i : nullptr);
  return total;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double t, const double* x, double* y, std::size_t n) {
  const __m256d tv = _mm256_set1_pd(t);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(tv, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += t * x[i];
}

void dir_update_avx2(double beta, const double* g, double* p, std::size_t n) {
  const __m256d bv = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(p + i, _mm256_fmsub_pd(bv, _mm256_loadu_pd(p + i), _mm256_loadu_pd(g + i)));
  for (; i < n; ++i) p[i] = -g[i] + beta * p[i];
}

double max_abs_avx2(const double* a, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(a + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::max({lanes[0], lanes[1], lanes[2], lanes[3]});
  for (; i < n; ++i) r = std::max(r, std::abs(a[i]));
  return r;
}

}  // namespace

const Table& avx2_table() {
  static const Table t{cells_row_avx2, dot_avx2, axpy_avx2, dir_update_avx2, max_abs_avx2, "avx2"};
  return t;
}

}  // namespace anisomt::kernels
