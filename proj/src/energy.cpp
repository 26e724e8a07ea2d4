#include "anisomt/energy.hpp"

#include <algorithm>
#include <cmath>

namespace anisomt {

namespace {

double int_pow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

}  // namespace

void require_pde_norm(const FinslerNorm& norm) {
  if (!norm.pde_supported())
    throw Error(Errc::degenerate_norm, "norm " + norm.describe() + " is not supported for PDE solves");
}

EnergyOperator::EnergyOperator(const Mesh& mesh, std::span<const std::uint8_t> mask,
                               const FinslerNorm& norm, double eps, const kernels::Table* table,
                               bool allow_kernel)
    : mesh_(mesh),
      mask_(mask.begin(), mask.end()),
      norm_(norm),
      eps_(eps),
      table_(table ? table : &kernels::active()) {
  if (norm.dim() != mesh.dim) throw Error(Errc::invalid_argument, "norm and mesh dimensions differ");
  bool edge = false;
  if (mesh.dim == 2)
    for (int j = 0; j < mesh.n[1] && !edge; ++j)
      for (int i = 0; i < mesh.n[0]; ++i)
        if ((i == 0 || j == 0 || i == mesh.n[0] - 1 || j == mesh.n[1] - 1) && mask_[mesh.index(i, j)]) {
          edge = true;
          break;
        }
  // The kernel's gradient assembly assumes mask nodes are interior to the box.
  if (allow_kernel && !edge && mesh.dim == 2 && norm.is_quadratic()) {
    quad2d_ = true;
    auto A = norm.quadratic_matrix();
    qp_.a11 = A[0];
    qp_.a12 = 0.5 * (A[1] + A[2]);
    qp_.a22 = A[3];
    qp_.eps2 = eps * eps;
    qp_.n = 2;
    qp_.inv_h = 1.0 / mesh.h;
    const std::size_t cells = std::size_t(mesh.n[0] - 1) * (mesh.n[1] - 1);
    fb_.resize(cells);
    ft_.resize(cells);
    fl_.resize(cells);
    fr_.resize(cells);
  }
}

double EnergyOperator::operator()(std::span<const double> u, std::span<double> grad) const {
  return quad2d_ ? quad_path(u, grad) : generic_path(u, grad);
}

double EnergyOperator::quad_path(std::span<const double> u, std::span<double> grad) const {
  const int nx = mesh_.n[0], ny = mesh_.n[1];
  const std::size_t cx = nx - 1;
  const bool want = !grad.empty();
  double acc = 0.0;
  for (int j = 0; j + 1 < ny; ++j) {
    const double* u0 = u.data() + std::size_t(j) * nx;
    const double* u1 = u0 + nx;
    const std::size_t off = std::size_t(j) * cx;
    acc += table_->cells_row(u0, u1, cx, qp_, want ? fb_.data() + off : nullptr,
                             want ? ft_.data() + off : nullptr, want ? fl_.data() + off : nullptr,
                             want ? fr_.data() + off : nullptr);
  }
  const double hn = mesh_.h * mesh_.h;
  if (want) {
    const double s = hn / mesh_.h;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t idx = std::size_t(j) * nx + i;
        if (!mask_[idx]) {
          grad[idx] = 0.0;
          continue;
        }
        // Mask nodes are never on the box edge, so all four cells exist.
        const std::size_t c00 = std::size_t(j) * cx + i;       // node is lower-left
        const std::size_t c10 = c00 - 1;                       // lower-right
        const std::size_t c01 = c00 - cx;                      // upper-left
        const std::size_t c11 = c01 - 1;                       // upper-right
        const double g = -fb_[c00] - fl_[c00] + fb_[c10] - fr_[c10] - ft_[c01] + fl_[c01] +
                         ft_[c11] + fr_[c11];
        grad[idx] = s * g;
      }
  }
  return acc * hn;
}

double EnergyOperator::generic_path(std::span<const double> u, std::span<double> grad) const {
  const int d = mesh_.dim;
  const int n = d;
  const int nx = mesh_.n[0], ny = mesh_.n[1], nz = mesh_.n[2];
  const double ih = 1.0 / mesh_.h;
  const double hn = mesh_.cell_measure();
  const int corners = 1 << d;
  const double wc = 1.0 / corners;
  const double e2 = eps_ * eps_;
  const bool want = !grad.empty();
  if (want) std::fill(grad.begin(), grad.end(), 0.0);
  double acc = 0.0;
  const int kmax = d == 3 ? nz - 1 : 1;
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i + 1 < nx; ++i) {
        std::size_t node[8];
        double val[8];
        bool any = false;
        for (int c = 0; c < corners; ++c) {
          node[c] = mesh_.index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
          val[c] = u[node[c]];
          any = any || val[c] != 0.0;
        }
        if (!any) continue;
        for (int c = 0; c < corners; ++c) {
          Vec g{};
          for (int a = 0; a < d; ++a) {
            const int lo = c & ~(1 << a), hi = c | (1 << a);
            g[a] = (val[hi] - val[lo]) * ih;
          }
          const double g2 = dot(g, g, d);
          if (g2 == 0.0) continue;
          Vec gf;
          const double f = want ? norm_.F_grad(g, gf) : norm_.F(g);
          const double fe2 = f * f + e2 * g2;
          const double fe = std::sqrt(fe2);
          acc += wc * int_pow(fe, n);
          if (want) {
            // d/dg F_eps^n = n F_eps^{n-2} (F grad F + eps^2 g)
            const double s = wc * hn * n * int_pow(fe, n - 2) * ih;
            for (int a = 0; a < d; ++a) {
              const double comp = s * (f * gf[a] + e2 * g[a]);
              const int lo = c & ~(1 << a), hi = c | (1 << a);
              grad[node[hi]] += comp;
              grad[node[lo]] -= comp;
            }
          }
        }
      }
  if (want)
    for (std::size_t idx = 0; idx < grad.size(); ++idx)
      if (!mask_[idx]) grad[idx] = 0.0;
  return acc * hn;
}

double dirichlet_energy(const GridFunction& u, const FinslerNorm& norm) {
  EnergyOperator E(u.mesh(), u.mask(), norm, 0.0);
  return E(u.values());
}

GridFunction neg_qn(const GridFunction& u, const FinslerNorm& norm) {
  require_pde_norm(norm);
  EnergyOperator E(u.mesh(), u.mask(), norm);
  GridFunction r = u.zeros_like();
  E(u.values(), r.values());
  const double s = 1.0 / (E.exponent() * u.mesh().cell_measure());
  for (double& v : r.values()) v *= s;
  return r;
}

GridFunction qn_residual(const GridFunction& u, const GridFunction& f, double alpha,
                         const FinslerNorm& norm) {
  if (!(u.mesh() == f.mesh())) throw Error(Errc::invalid_argument, "u and f on different meshes");
  GridFunction r = neg_qn(u, norm);
  const int n = u.mesh().dim;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!u.mask()[i]) continue;
    const double v = u[i];
    r[i] -= f[i] + alpha * v * std::pow(std::abs(v), n - 2);
  }
  return r;
}

}  // namespace anisomt
