#include "anisomt/pde.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <fmt/format.h>

namespace anisomt {

namespace {

double signed_pow(double v, double e) { return v < 0 ? -std::pow(-v, e) : std::pow(v, e); }

// Lattice distance (in units of h) to the nearest unmasked node.
GridFunction distance_surrogate(const GridFunction& domain) {
  GridFunction d = domain.zeros_like();
  const Mesh& m = domain.mesh();
  std::vector<int> dist(m.size(), -1);
  std::deque<std::size_t> q;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!domain.mask()[i]) {
      dist[i] = 0;
      q.push_back(i);
    }
  const int dim = m.dim;
  while (!q.empty()) {
    std::size_t idx = q.front();
    q.pop_front();
    auto c = m.coords(idx);
    for (int a = 0; a < dim; ++a)
      for (int s : {-1, 1}) {
        auto nb = c;
        nb[a] += s;
        if (nb[a] < 0 || nb[a] >= m.n[a]) continue;
        std::size_t j = m.index(nb[0], nb[1], nb[2]);
        if (dist[j] < 0) {
          dist[j] = dist[idx] + 1;
          q.push_back(j);
        }
      }
  }
  for (std::size_t i = 0; i < m.size(); ++i)
    if (domain.mask()[i]) d[i] = dist[i] * m.h;
  return d;
}

}  // namespace

GridFunction dirichlet_solve(const GridFunction& f, const FinslerNorm& norm, const SolveOptions& opt,
                             SolveStats* stats) {
  require_pde_norm(norm);
  const Mesh& m = f.mesh();
  const int n = m.dim;
  const double hn = m.cell_measure();
  EnergyOperator E(m, f.mask(), norm);
  GridFunction u = opt.initial ? *opt.initial : f.zeros_like();
  u.apply_mask();
  std::vector<double> fm(f.values().begin(), f.values().end());
  for (std::size_t i = 0; i < fm.size(); ++i)
    if (!f.mask()[i]) fm[i] = 0.0;
  const auto& k = kernels::active();
  Objective obj = [&](std::span<const double> x, std::span<double> g) {
    double e = E(x, g) / n;
    for (auto& v : g) v /= n;
    const double lin = k.dot(fm.data(), x.data(), x.size()) * hn;
    k.axpy(-hn, fm.data(), g.data(), g.size());
    return e - lin;
  };
  const double fmax = k.max_abs(fm.data(), fm.size());
  NcgOptions o;
  o.tol = opt.tol_rel * (1.0 + fmax);
  o.residual_scale = 1.0 / hn;
  o.max_iter = opt.max_iter;
  o.sink = opt.sink;
  o.quadratic = (n == 2 && norm.is_quadratic());
  auto r = ncg_minimize(obj, u.values(), o);
  if (stats) *stats = {r.iterations, r.evaluations, r.residual, r.energy};
  if (!r.converged)
    throw Error(Errc::non_convergence,
                fmt::format("dirichlet_solve: residual {:.3e} after {} iterations (target {:.3e})",
                            r.residual, r.iterations, o.tol));
  return u;
}

double rayleigh_quotient(const GridFunction& u, const FinslerNorm& norm) {
  const double n = u.mesh().dim;
  return dirichlet_energy(u, norm) / std::pow(u.lp_norm(n), n);
}

EigenPair first_eigenpair(const GridFunction& domain, const FinslerNorm& norm, const EigenOptions& opt) {
  require_pde_norm(norm);
  const int n = domain.mesh().dim;
  if (domain.mask_measure() == 0.0) throw Error(Errc::invalid_argument, "empty mask");
  EigenPair ep;
  GridFunction u = distance_surrogate(domain);
  {
    const double s = 1.0 / u.lp_norm(n);
    for (double& v : u.values()) v *= s;
  }
  double lambda = dirichlet_energy(u, norm);
  for (int it = 1; it <= opt.max_outer; ++it) {
    GridFunction f = u.zeros_like();
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = lambda * signed_pow(u[i], n - 1);
    SolveOptions so = opt.inner;
    so.initial = &u;
    GridFunction v = dirichlet_solve(f, norm, so);
    double vmax = 0.0, vmin = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v.mask()[i]) vmax = std::max(vmax, v[i]), vmin = std::min(vmin, v[i]);
    if (vmin < -1e-10 * vmax) {
      // SignFlip: restart from |v|
      if (++ep.sign_restarts > 3) throw Error(Errc::sign_flip, "eigen iterate keeps losing positivity");
      for (double& x : v.values()) x = std::abs(x);
    }
    const double s = 1.0 / v.lp_norm(n);
    for (double& x : v.values()) x *= s;
    const double next = dirichlet_energy(v, norm);
    u = std::move(v);
    ep.outer_iterations = it;
    const bool done = std::abs(next - lambda) < opt.tol * lambda;
    lambda = next;
    if (done) {
      ep.lambda1 = lambda;
      ep.eigenfunction = std::move(u);
      return ep;
    }
  }
  throw Error(Errc::non_convergence, "first_eigenpair: inverse iteration did not settle");
}

GridFunction mollified_dirac(const GridFunction& domain, const FinslerNorm& norm, const Vec& x0) {
  GridFunction d = domain.zeros_like();
  const double h = domain.mesh().h;
  double mass = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!d.mask()[i]) continue;
    const double r = norm.polar(sub(domain.mesh().point(i), x0));
    const double v = std::max(0.0, 1.0 - r / (2.0 * h));
    d[i] = v;
    mass += v;
  }
  if (mass == 0.0) throw Error(Errc::invalid_argument, "x0 is not interior");
  const double s = 1.0 / (mass * domain.mesh().cell_measure());
  for (double& v : d.values()) v *= s;
  return d;
}

namespace {

GreenResult green_impl(const GridFunction& domain, const FinslerNorm& norm, double alpha, const Vec& x0,
                       const GreenOptions& opt) {
  require_pde_norm(norm);
  if (alpha < 0.0) throw Error(Errc::invalid_argument, "alpha must be nonnegative");
  if (opt.lambda1 && alpha >= *opt.lambda1)
    throw Error(Errc::non_convergence,
                fmt::format("alpha = {} is not below lambda1 = {}", alpha, *opt.lambda1));
  const Mesh& m = domain.mesh();
  const int n = m.dim;
  const double h = m.h;
  GreenResult res;
  const GridFunction delta = mollified_dirac(domain, norm, x0);
  GridFunction G = dirichlet_solve(delta, norm, opt.inner);
  if (alpha > 0.0) {
    bool settled = false;
    for (int it = 1; it <= opt.fp_max_iter; ++it) {
      GridFunction f = delta;
      for (std::size_t i = 0; i < f.size(); ++i) f[i] += alpha * signed_pow(G[i], n - 1);
      SolveOptions so = opt.inner;
      so.initial = &G;
      GridFunction next = dirichlet_solve(f, norm, so);
      double diff = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < G.size(); ++i) {
        diff = std::max(diff, std::abs(next[i] - G[i]));
        scale = std::max(scale, std::abs(next[i]));
      }
      G = std::move(next);
      res.fixed_point_iterations = it;
      if (!std::isfinite(scale) || scale > 1e12)
        throw Error(Errc::non_convergence, "Green fixed point diverges (alpha too close to lambda1)");
      if (diff < opt.fp_tol * scale) {
        settled = true;
        break;
      }
    }
    if (!settled) throw Error(Errc::non_convergence, "Green fixed point did not settle");
  }

  const double kap = kappa_n(norm);
  const double c = std::pow(n * kap, -1.0 / (n - 1));
  res.c_n = c;
  double sy = 0.0, sy2 = 0.0;
  std::size_t cnt = 0;
  double sx = 0.0, sg = 0.0, sxx = 0.0, sxg = 0.0;
  std::size_t cs = 0;
  double inner_sum = 0.0;
  std::size_t inner_cnt = 0;
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (!G.mask()[i]) continue;
    const double r = norm.polar(sub(m.point(i), x0));
    if (r < opt.fit_inner * h) continue;
    const double X = -c * std::log(r);
    if (r <= opt.fit_outer * h) {
      const double y = G[i] - X;
      sy += y;
      sy2 += y * y;
      ++cnt;
      if (r <= (opt.fit_inner + 1.0) * h) inner_sum += y, ++inner_cnt;
    }
    if (r <= opt.slope_outer * h) {
      sx += X;
      sg += G[i];
      sxx += X * X;
      sxg += X * G[i];
      ++cs;
    }
  }
  if (cnt < 3 || cs < 3) throw Error(Errc::fit_unstable, "Green fit annulus has too few nodes");
  res.annulus_nodes = cnt;
  res.C_G = sy / cnt;
  res.fit_residual = std::sqrt(std::max(0.0, sy2 / cnt - res.C_G * res.C_G));
  const double mx = sx / cs, mg = sg / cs;
  res.gamma = (sxg / cs - mx * mg) / (sxx / cs - mx * mx);
  res.psi_inner = inner_cnt ? inner_sum / inner_cnt - res.C_G : 0.0;
  res.fit_unstable = res.fit_residual > 0.2 * std::max(std::abs(res.C_G), c);
  res.norm_n_pow = std::pow(G.lp_norm(n), n);
  res.G = std::move(G);
  return res;
}

}  // namespace

GreenResult green_function(const GridFunction& domain, const FinslerNorm& norm, double alpha,
                           const Vec& x0, const GreenOptions& opt) {
  GreenResult r = green_impl(domain, norm, alpha, x0, opt);
  if (r.fit_unstable)
    throw Error(Errc::fit_unstable, fmt::format("Green fit residual {:.3e} vs C_G {:.3e}", r.fit_residual, r.C_G));
  return r;
}

GreenResult green_function_nothrow_fit(const GridFunction& domain, const FinslerNorm& norm,
                                       double alpha, const Vec& x0, const GreenOptions& opt) {
  return green_impl(domain, norm, alpha, x0, opt);
}

}  // namespace anisomt
