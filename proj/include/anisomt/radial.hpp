#pragma once

#include <functional>
#include <vector>

#include "anisomt/finsler_norm.hpp"
#include "anisomt/grid.hpp"

namespace anisomt {

// w as a function of r = F°(x). `exact` is set when a closed form exists.
struct RadialFunction {
  std::vector<double> radii;  // 0 = r_0 < r_1 < ...
  std::vector<double> values;
  FinslerNorm norm;
  std::function<double(double)> exact;

  // closed form if present, else linear interpolation (clamped at the ends)
  double operator()(double r) const;
};

std::vector<double> uniform_radii(double r_max, int m);  // m + 1 points

// w(r) = -((n-1)/lambda_n) log(1 + kappa^{1/(n-1)} r^{n/(n-1)})
RadialFunction bubble(const FinslerNorm& norm, std::vector<double> radii);

// -r^{1-n} (r^{n-1} |w'|^{n-2} w')'  by flux differences; radial Wulff reduction
// of -Q_n (the anisotropy only enters through r = F°).
std::vector<double> radial_neg_qn(const RadialFunction& w);

// max |radial_neg_qn(w) - e^{n/(n-1) lambda_n w}| over interior radii in [r_lo, r_hi]
double bubble_residual(const RadialFunction& w, double r_lo = 0.1, double r_hi = 10.0);

struct BubbleMass {
  double total = 0.0;       // quadrature + tail
  double quadrature = 0.0;  // n kappa int_0^R e^{...} r^{n-1} dr
  double tail = 0.0;        // exact remainder beyond R_max
};

BubbleMass bubble_mass(const RadialFunction& w, double r_max);

// Grid operator vs. radial reduction for the sampled bubble.
struct BubbleGridCheck {
  double h = 0.0;
  double max_rel_dev = 0.0;  // max over F° <= r_check of |grid - radial| / radial
  double max_abs_dev = 0.0;
  std::size_t nodes = 0;
};

BubbleGridCheck bubble_grid_check(const FinslerNorm& norm, double h, double r_check = 2.0);

}  // namespace anisomt
