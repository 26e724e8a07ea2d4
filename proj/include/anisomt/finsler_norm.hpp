#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anisomt/error.hpp"
#include "anisomt/vec.hpp"

namespace anisomt {

enum class NormFamily { euclidean, weighted_p_norm, quadratic_form, sampled_support };

std::string family_name(NormFamily f);

// Even, convex, 1-homogeneous gauge F with its polar F°.
// Immutable after construction.
class FinslerNorm {
 public:
  static FinslerNorm euclidean(int dim);
  // F(xi) = || (w_i xi_i) ||_p ; p may be +infinity.
  static FinslerNorm weighted_p_norm(double p, std::vector<double> weights);
  // F(xi) = sqrt(xi^T A xi), A row-major dim x dim, SPD.
  static FinslerNorm quadratic_form(int dim, std::vector<double> A);
  // 2D only. F is the support function of the polygon
  //   K = { x : <x, u_k> <= h_k },  u_k = (cos t_k, sin t_k).
  // Antipodal directions are added so that F is even.
  static FinslerNorm sampled_support(std::vector<double> angles, std::vector<double> support);

  NormFamily family() const { return family_; }
  int dim() const { return dim_; }
  double p() const { return p_; }
  const std::vector<double>& weights() const { return w_; }
  const std::vector<double>& matrix() const { return A_; }
  const std::vector<double>& support_angles() const { return angles_; }
  const std::vector<double>& support_values() const { return hvals_; }

  double a() const { return a_; }
  double b() const { return b_; }

  double F(const Vec& xi) const;
  // Throws ZeroVector at 0.
  Vec grad_F(const Vec& xi) const;
  // F and grad F together; g is left zero at the origin.
  double F_grad(const Vec& xi, Vec& g) const;
  double polar(const Vec& x) const;
  Vec grad_polar(const Vec& x) const;

  // True when gradients come from closed forms rather than finite differences.
  bool analytic_gradient() const;
  // p in {1, inf} and polygonal support functions have Hess(F^2) degenerate.
  bool pde_supported() const;
  // True when F is sqrt of a quadratic form (euclidean included).
  bool is_quadratic() const;
  // Dense SPD matrix for quadratic families (identity for euclidean).
  std::vector<double> quadratic_matrix() const;

  std::string describe() const;

 private:
  FinslerNorm() = default;
  void finish_construction();
  double polar_sampled(const Vec& x) const;
  Vec fd_gradient(double (FinslerNorm::*f)(const Vec&) const, const Vec& x) const;

  NormFamily family_ = NormFamily::euclidean;
  int dim_ = 2;
  double p_ = 2.0;
  std::vector<double> w_;
  std::vector<double> A_;
  std::vector<double> Ainv_;
  std::vector<double> angles_, hvals_;
  std::vector<Vec> vertices_;  // polygon K for sampled_support
  std::vector<Vec> normals_;   // facet normals u_k (unit) with offsets in offsets_
  std::vector<double> offsets_;
  double a_ = 1.0, b_ = 1.0;
};

double eval_F(const FinslerNorm& norm, const Vec& xi);
Vec grad_F(const FinslerNorm& norm, const Vec& xi);
double polar(const FinslerNorm& norm, const Vec& x);

// |{F° <= 1}|; n in {2, 3}.
double kappa_n(const FinslerNorm& norm);
// n^{n/(n-1)} kappa^{1/(n-1)}
double lambda_n(const FinslerNorm& norm);

struct DualityReport {
  int samples = 0;
  double triangle = 0.0;      // (i)
  double gradient_bounds = 0.0;  // (ii)
  double euler = 0.0;         // (iii)
  double unit_dual = 0.0;     // (iv)
  double inversion = 0.0;     // (v)
  double sign_homog = 0.0;    // (vi)
  bool analytic = true;

  double max_violation() const;
};

DualityReport duality_check(const FinslerNorm& norm, int samples, std::uint64_t seed = 1);

}  // namespace anisomt
