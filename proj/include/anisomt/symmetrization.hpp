#pragma once

#include <vector>

#include "anisomt/grid.hpp"

namespace anisomt {

// Step function u*(t): each masked node carries measure h^n, values of |u| sorted
// in decreasing order. u*(t) = sorted[floor(t / h^n)], zero past |mask|.
struct Rearrangement {
  std::vector<double> sorted;
  double cell = 0.0;  // h^n

  double operator()(double t) const;
  double total_measure() const { return cell * double(sorted.size()); }
  // |{u* > s}|
  double distribution(double s) const;
  double integral() const;  // int u* dt
};

Rearrangement decreasing_rearrangement(const GridFunction& u);

// u⋆(x) = u*(kappa F°(x)^n) on a fresh origin-centered mesh with the same h that
// covers the Wulff ball of measure |mask|.
GridFunction convex_symmetrize(const GridFunction& u, const FinslerNorm& norm);

struct PerimeterResult {
  double perimeter = 0.0;  // sum over interface segments of F(nu) * length
  double area = 0.0;       // measure of the interpolated superlevel set
  std::size_t segments = 0;
  bool empty_set = false;
};

// Marching squares on {u > t}, 2D only. Saddle cells are split by the cell mean.
PerimeterResult anisotropic_perimeter(const GridFunction& u, double t, const FinslerNorm& norm);

struct IsoperimetricResult {
  double ratio = 0.0;  // P_F(E) / (n kappa^{1/n} |E|^{1-1/n})
  PerimeterResult set;
};

IsoperimetricResult isoperimetric_ratio(const GridFunction& u, double t, const FinslerNorm& norm);

struct CoareaReport {
  double gradient_integral = 0.0;  // sum_nodes F(centered grad) h^n
  double level_integral = 0.0;     // trapezoid of P_F({u > t}) over t
  double discrepancy = 0.0;        // |a - b| / max(a, b); 0 when both vanish
  int levels = 0;
};

CoareaReport coarea_check(const GridFunction& u, const FinslerNorm& norm, int levels);

}  // namespace anisomt
