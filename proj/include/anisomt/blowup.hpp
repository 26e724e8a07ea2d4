#pragma once

#include <string>
#include <vector>

#include "anisomt/mt_functional.hpp"

namespace anisomt {

// Quintic step: 0 for s <= 0, 1 for s >= 1, C^2 in between.
double smooth_step(double s);

// ---- Moser-type family on a domain containing the unit Wulff ball ----

struct MoserParams {
  double epsilon = 1e-3;
  double t_eps = 0.0;  // explicit value; 0 selects (log 1/eps)^{-t_exponent}
  double t_exponent = 0.0;  // 0 selects (2n+1)/(2n(n+1)); admissible window is (1/(n+1), 1/n)
  double h = 1.0 / 64;
  Vec center{};        // concentration point (translation of the origin)
};

struct MoserFunction {
  GridFunction v;  // normalized v_eps sampled on the grid (core and annulus included)
  double epsilon = 0.0, t_eps = 0.0, delta = 0.0;
  double core_value = 0.0;  // ((n/lambda_n) log 1/eps)^{(n-1)/n}, before normalization
  double phi_x_delta = 0.0;
  double energy_core = 0.0;  // 0 by construction
  double energy_annulus = 0.0;
  double energy_outer = 0.0;
  double energy_total = 0.0;     // of phi_eps before normalization
  double annulus_expansion = 0.0;  // 1 - n^{(n+1)/n} kappa^{1/n} L^{-(n-1)/n} t phi(x_delta)
  double scale = 0.0;            // |F(grad phi_eps)|_n, v = phi / scale
  double lambda1 = 0.0;
  Vec center{}, x_delta{};
};

// Eigenpair on the domain is computed (or reused) to build the outer piece.
MoserFunction build_moser_sequence(const MoserParams& p, const FinslerNorm& norm, const Domain& domain,
                                   const EigenPair* eig = nullptr);

// J_lambda^alpha(v_eps) with the core and log annulus integrated radially.
JValue evaluate_moser_J(const MoserFunction& m, const MTConfig& cfg, const FinslerNorm& norm);

struct DivergenceRow {
  double epsilon = 0.0, t_eps = 0.0, delta = 0.0;
  double J = 0.0, log_J = 0.0;
  double growth_variable = 0.0;  // (log 1/eps)^{1/n} t_eps
  double energy = 0.0;           // after normalization (1)
  double M = 0.0;                // max v_eps
  std::size_t saturated_cells = 0;
};

struct DivergenceTable {
  double alpha = 0.0, lambda = 0.0, lambda1 = 0.0;
  std::vector<DivergenceRow> rows;
  double slope = 0.0;        // least squares d log J / d growth_variable
  double correlation = 0.0;  // Pearson correlation of (growth_variable, log J)
  bool strictly_increasing = false;
  double ratio = 0.0;        // J(last) / J(first)
};

// alpha < 0 means "use the computed lambda1".
DivergenceTable divergence_demo(double alpha, double lambda, const std::vector<double>& eps_ladder,
                                const FinslerNorm& norm, const Domain& domain, double h,
                                double t_exponent = 0.0);

// ---- glued bubble around x0 ----

struct GluedParams {
  double epsilon = 1e-3;
  double alpha = 0.0;
  double h = 1.0 / 256;
  Vec x0{};
  double blend_min_cells = 8.0;  // blending radius is max(R eps, blend_min_cells * h)
};

struct GluedBubble {
  double epsilon = 0.0, R = 0.0, rho = 0.0;  // rho: blending radius
  double C = 0.0;                 // analytic, from the energy expansion
  double C_pow = 0.0;             // C^{n/(n-1)}
  double b_analytic = 0.0;        // (n-1)/lambda_n H_{n-1}
  double b_numeric = 0.0;         // from exact continuity with the numerically exact C
  double C_pow_numeric = 0.0;     // makes the assembled energy exactly 1
  double C_G = 0.0, c_n = 0.0, G_norm_n = 0.0;
  double D = 1.0;                 // (1 + alpha C^{-n/(n-1)} |G|_n^n)^{1/n}
  double energy_core = 0.0, energy_annulus = 0.0, energy_outer = 0.0;
  double energy_pre = 0.0;        // before the normalization sweep
  double energy_post = 0.0;       // after it
  double interface_jump = 0.0;    // |core - outer| at F° = R eps, relative to the core amplitude
  double core_amplitude = 0.0;
  double sweep = 1.0;             // final division factor
  double scale = 0.0;             // phi = scale * (unscaled piece) in every region
  Vec x0{};
  bool green_fit_unstable = false;
  GridFunction phi;               // grid samples of the final phi_eps (outer region exact)
  GreenResult green;
};

// Throws DomainTooSmall if W_{2 rho}(x0) leaves the mask, ConstantsMismatch if the
// continuity-derived and expansion-derived C differ by more than 5%.
GluedBubble build_glued_bubble(const GluedParams& p, const FinslerNorm& norm, const Domain& domain,
                               const GreenResult* green = nullptr);

// J_{lambda_n}^alpha of the normalized glued bubble, radial inside W_rho.
JValue evaluate_glued_J(const GluedBubble& g, double alpha, const FinslerNorm& norm);

struct SandwichRow {
  double epsilon = 0.0, J = 0.0, energy = 0.0, energy_pre = 0.0, M = 0.0, interface_jump = 0.0, b_numeric = 0.0;
  std::size_t saturated_cells = 0;
};

struct SandwichReport {
  double B = 0.0;  // |Omega| + kappa e^{lambda_n C_G + H_{n-1}}
  double domain_measure = 0.0, C_G = 0.0, H = 0.0;
  std::vector<SandwichRow> rows;
  double max_J = 0.0;
  bool exceeds = false;
};

SandwichReport bound_sandwich(const FinslerNorm& norm, const Domain& domain, double alpha,
                              const std::vector<double>& eps_ladder, double h);

// ---- binomial sums ----

struct IdentityRow {
  int n = 0;
  std::string lhs_a, rhs_a, lhs_b, rhs_b;  // exact fractions "p/q"
  bool a_holds = false, b_holds = false;
};

std::vector<IdentityRow> harmonic_identities(int n_max);

}  // namespace anisomt
