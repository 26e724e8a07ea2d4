#pragma once

#include <cstddef>
#include <string_view>

namespace anisomt::kernels {

// Quadratic gauge F(g)^2 = a11 gx^2 + 2 a12 gx gy + a22 gy^2, regularized by eps2 |g|^2.
struct QuadParams {
  double a11 = 1.0, a12 = 0.0, a22 = 1.0;
  double eps2 = 0.0;
  int n = 2;         // energy exponent
  double inv_h = 1.0;
};

// One row of 2D cells between node rows u0 (lower) and u1 (upper), ncells cells.
// Returns sum over cells of (1/4) sum_corners F^n(g_corner). When fb is non-null,
// writes d(cell energy)/d(g) attributed to the bottom/top/left/right edges.
using CellsRowFn = double (*)(const double* u0, const double* u1, std::size_t ncells,
                              const QuadParams& p, double* fb, double* ft, double* fl,
                              double* fr);
using DotFn = double (*)(const double* a, const double* b, std::size_t n);
// y += t * x
using AxpyFn = void (*)(double t, const double* x, double* y, std::size_t n);
// p = -g + beta * p
using DirUpdateFn = void (*)(double beta, const double* g, double* p, std::size_t n);
using MaxAbsFn = double (*)(const double* a, std::size_t n);

struct Table {
  CellsRowFn cells_row;
  DotFn dot;
  AxpyFn axpy;
  DirUpdateFn dir_update;
  MaxAbsFn max_abs;
  std::string_view name;
};

const Table& scalar();
// Null when the build or the host lacks AVX2+FMA.
const Table* avx2();
// Best available table; ANISOMT_FORCE_SCALAR=1 in the environment forces scalar.
const Table& active();

}  // namespace anisomt::kernels
