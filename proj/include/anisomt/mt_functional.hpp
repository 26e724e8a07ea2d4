#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anisomt/pde.hpp"

namespace anisomt {

struct MTConfig {
  double lambda = 0.0;       // exponent coefficient
  double alpha = 0.0;        // L^n perturbation
  double epsilon_sub = 0.0;  // lambda = lambda_n - epsilon_sub for subcritical runs

  static MTConfig subcritical(const FinslerNorm& norm, double eps_sub, double alpha = 0.0);
  void validate() const;
};

inline constexpr double kExponentCap = 700.0;

struct JValue {
  double value = 0.0;
  std::size_t saturated_cells = 0;  // cells whose exponent hit the cap
  bool saturated() const { return saturated_cells > 0; }
};

// int exp(lambda (1 + alpha |u|_n^n)^{1/(n-1)} |u|^{n/(n-1)}) as a sum over masked nodes.
JValue evaluate_J(const GridFunction& u, const MTConfig& cfg);

struct ELParams {
  double alpha_eps = 0.0;
  double beta_eps = 1.0;
  double gamma_eps = 0.0;
  double lambda_eps = 0.0;
};

struct MTReport {
  double J_value = 0.0;
  double domain_measure = 0.0;
  double constraint_residual = 0.0;  // | |F(grad u)|_n - 1 |
  ELParams el;
  double M_eps = 0.0;
  Vec x_eps{};
  double r_eps = 0.0;
  double el_residual_norm = 0.0;  // sup |residual| / sup |source|
  double el_source_scale = 0.0;
  bool saturated = false;
  std::string start;  // which multi-start profile won
  int iterations = 0;
};

// Rescale so that int F^n(grad u) = 1.
void project_to_constraint(GridFunction& u, const FinslerNorm& norm);

MTReport el_verify(const GridFunction& u, const MTConfig& cfg, const FinslerNorm& norm);

struct MaximizeOptions {
  double h = 1.0 / 64;
  int max_iter = 2000;
  double stationarity_tol = 1e-6;  // stop when the relative EL residual drops below this
  double armijo = 1e-4;
  double initial_step = 1.0;
  double jitter = 0.0;  // relative noise added to each start
  std::uint64_t seed = 1;
  SolveOptions inner;
  TelemetrySink sink;  // iteration, J, relative EL residual
};

struct StartRecord {
  std::string name;
  double J_start = 0.0;
  double J_final = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct MaximizeResult {
  GridFunction u;
  MTReport report;
  std::vector<StartRecord> starts;
};

// Projected ascent on J over {|F(grad u)|_n = 1} from three starts: Wulff cone,
// first eigenfunction, truncated log profile. Throws NonConvergence, or Saturation
// if the exponent cap is hit.
MaximizeResult maximize_subcritical(const MTConfig& cfg, const FinslerNorm& norm, const Domain& domain,
                                    const MaximizeOptions& opt = {});

struct ConcentrationReport {
  double M_eps = 0.0;
  Vec x_eps{};
  double r_eps = 0.0;
  bool mesh_too_coarse = false;    // r_eps < 2h
  double w0 = 0.0;                 // rescaled profile at the origin
  double bubble_deviation = 0.0;   // sup over F°(y) <= R of |w_eps(y) - w(F°(y))|
  double lambda_over_M = 0.0;      // lambda_eps / M^{n/(n-1)}
  std::optional<double> green_deviation;  // sup of |M^{1/(n-1)} u - G| away from x_eps
};

struct ConcentrationOptions {
  double profile_radius = 2.0;
  int samples = 64;            // per axis on the rescaled box
  bool with_green = false;
  double green_exclusion = 0.25;  // ignore F°(x - x_eps) below this
};

ConcentrationReport concentration_diagnostics(const GridFunction& u, const MTConfig& cfg, const FinslerNorm& norm,
                                              const ConcentrationOptions& opt = {});

std::string to_json(const MTReport& r);

}  // namespace anisomt
