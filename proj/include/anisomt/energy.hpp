#pragma once

#include <span>
#include <vector>

#include "anisomt/grid.hpp"
#include "anisomt/kernels.hpp"

namespace anisomt {

inline constexpr double kRegularization = 1e-8;

// Discrete anisotropic Dirichlet energy on a masked mesh:
//   E(u) = sum_cells h^n * mean_{corners} F_eps(g_corner)^n
// where g_corner uses the one-sided differences along the cell edges at that corner.
// The exponent n is the spatial dimension.
class EnergyOperator {
 public:
  EnergyOperator(const Mesh& mesh, std::span<const std::uint8_t> mask, const FinslerNorm& norm,
                 double eps = kRegularization, const kernels::Table* table = nullptr,
                 bool allow_kernel = true);

  // Energy and (optionally) its gradient with respect to nodal values; the gradient
  // vanishes off the mask.
  double operator()(std::span<const double> u, std::span<double> grad = {}) const;

  const Mesh& mesh() const { return mesh_; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  const FinslerNorm& norm() const { return norm_; }
  int exponent() const { return mesh_.dim; }
  double eps() const { return eps_; }
  bool uses_kernel() const { return quad2d_; }

 private:
  double quad_path(std::span<const double> u, std::span<double> grad) const;
  double generic_path(std::span<const double> u, std::span<double> grad) const;

  Mesh mesh_;
  std::vector<std::uint8_t> mask_;
  FinslerNorm norm_;
  double eps_;
  const kernels::Table* table_;
  bool quad2d_ = false;
  kernels::QuadParams qp_;
  mutable std::vector<double> fb_, ft_, fl_, fr_;
};

// Unregularized energy sum_cells F^n(grad_h u) h^n.
double dirichlet_energy(const GridFunction& u, const FinslerNorm& norm);

// Residual of -Q_n u - f - alpha u|u|^{n-2}, assembled as the gradient of
//   (1/n) E(u) - sum f u h^n - (alpha/n) sum |u|^n h^n
// divided by h^n. Throws DegenerateNorm for PDE-unsupported norms.
GridFunction qn_residual(const GridFunction& u, const GridFunction& f, double alpha,
                         const FinslerNorm& norm);

// Discrete -Q_n u (= residual with f = 0, alpha = 0), regularized operator.
GridFunction neg_qn(const GridFunction& u, const FinslerNorm& norm);

void require_pde_norm(const FinslerNorm& norm);

}  // namespace anisomt
