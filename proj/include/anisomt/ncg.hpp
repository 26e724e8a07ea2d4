#pragma once

#include <functional>
#include <iosfwd>
#include <span>

#include "anisomt/kernels.hpp"

namespace anisomt {

struct IterRecord {
  int iteration = 0;
  double energy = 0.0;
  double residual = 0.0;  // scaled gradient inf-norm
};

using TelemetrySink = std::function<void(const IterRecord&)>;

// Writes "iteration,energy,residual" rows (header first) to os.
TelemetrySink csv_sink(std::ostream& os);

// value_and_grad(x, g) returns the objective and fills g.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

struct NcgOptions {
  double tol = 1e-9;             // stop when residual_scale * |g|_inf < tol
  double residual_scale = 1.0;
  int max_iter = 50000;
  double armijo = 1e-4;
  double curvature = 0.1;
  // Objective is exactly quadratic: gradients along the search line are obtained by
  // linear recurrence (one evaluation per iteration), refreshed periodically.
  bool quadratic = false;
  int refresh_every = 50;
  TelemetrySink sink;
  int telemetry_every = 1;
};

struct NcgResult {
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  double energy = 0.0;
  double residual = 0.0;
};

// Polak-Ribiere+ nonlinear conjugate gradient with a safeguarded secant line search
// on the directional derivative and Armijo backtracking. Minimizes in place.
NcgResult ncg_minimize(const Objective& obj, std::span<double> x, const NcgOptions& opt,
                       const kernels::Table& k = kernels::active());

}  // namespace anisomt
