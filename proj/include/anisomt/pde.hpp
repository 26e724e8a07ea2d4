#pragma once

#include <optional>

#include "anisomt/energy.hpp"
#include "anisomt/ncg.hpp"

namespace anisomt {

struct SolveOptions {
  double tol_rel = 1e-9;  // stop when |residual|_inf < tol_rel (1 + |f|_inf)
  int max_iter = 50000;
  TelemetrySink sink;
  const GridFunction* initial = nullptr;  // warm start
};

struct SolveStats {
  int iterations = 0;
  int evaluations = 0;
  double residual = 0.0;
  double energy = 0.0;
};

// Minimizer of (1/n) int F^n(grad u) - int f u over masked grid functions.
// Throws NonConvergence after max_iter, DegenerateNorm for unsupported norms.
GridFunction dirichlet_solve(const GridFunction& f, const FinslerNorm& norm,
                             const SolveOptions& opt = {}, SolveStats* stats = nullptr);

struct EigenOptions {
  double tol = 1e-8;
  int max_outer = 200;
  SolveOptions inner;
};

struct EigenPair {
  double lambda1 = 0.0;
  GridFunction eigenfunction;  // L^n-normalized, positive
  int outer_iterations = 0;
  int sign_restarts = 0;
};

// Rayleigh quotient E(u) / |u|_n^n with the unregularized energy.
double rayleigh_quotient(const GridFunction& u, const FinslerNorm& norm);

// Inverse iteration on the masked domain of `domain` (values ignored).
EigenPair first_eigenpair(const GridFunction& domain, const FinslerNorm& norm,
                          const EigenOptions& opt = {});

struct GreenOptions {
  double fit_inner = 4.0;   // annulus in units of h
  double fit_outer = 8.0;
  double slope_outer = 8.0;
  double fp_tol = 1e-9;
  int fp_max_iter = 500;
  std::optional<double> lambda1;  // checked against alpha when given
  SolveOptions inner;
};

struct GreenResult {
  GridFunction G;
  double C_G = 0.0;
  double gamma = 0.0;         // fitted slope
  double fit_residual = 0.0;  // RMS of G + c log F° - C_G on the annulus
  double psi_inner = 0.0;     // remainder at the inner annulus edge
  double c_n = 0.0;           // (n kappa)^{-1/(n-1)}
  bool fit_unstable = false;
  int fixed_point_iterations = 0;
  std::size_t annulus_nodes = 0;
  double norm_n_pow = 0.0;  // |G|_n^n
};

// Mollified Dirac at x0: Wulff hat of radius 2h with unit discrete mass.
GridFunction mollified_dirac(const GridFunction& domain, const FinslerNorm& norm, const Vec& x0);

// -Q_n G = delta_h + alpha G^{n-1}. Throws NonConvergence; FitUnstable when the
// annulus regression residual exceeds 20% of max(|C_G|, c_n).
GreenResult green_function(const GridFunction& domain, const FinslerNorm& norm, double alpha,
                           const Vec& x0, const GreenOptions& opt = {});

// Same, but reports instability through the flag instead of throwing.
GreenResult green_function_nothrow_fit(const GridFunction& domain, const FinslerNorm& norm,
                                       double alpha, const Vec& x0, const GreenOptions& opt = {});

}  // namespace anisomt
