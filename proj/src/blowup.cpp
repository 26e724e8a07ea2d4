#include "anisomt/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "anisomt/energy.hpp"
#include "anisomt/error.hpp"

namespace anisomt {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double harmonic(int m) {
  double s = 0.0;
  for (int k = 1; k <= m; ++k) s += 1.0 / k;
  return s;
}

// n kappa int_a^b f(r) r^{n-1} dr, in log r when a > 0
double radial_integral(const std::function<double(double)>& f, double a, double b, int n, double kappa) {
  if (!(b > a)) return 0.0;
  double s = 0.0;
  if (a <= 0.0) {
    s = GK::integrate([&](double r) { return f(r) * std::pow(r, n - 1); }, 0.0, b, 15, 1e-13);
  } else {
    s = GK::integrate([&](double t) {
          const double r = std::exp(t);
          return f(r) * std::pow(r, n);
        },
                      std::log(a), std::log(b), 15, 1e-13);
  }
  return n * kappa * s;
}

// deterministic directions on the unit Euclidean sphere (n = 2, 3)
std::vector<Vec> sphere_directions(int n) {
  std::vector<Vec> d;
  if (n == 2) {
    for (int k = 0; k < 720; ++k) {
      const double a = 2 * std::numbers::pi * k / 720;
      d.push_back(vec2(std::cos(a), std::sin(a)));
    }
  } else {
    const int m = 2000;
    const double ga = std::numbers::pi * (3 - std::sqrt(5.0));
    for (int k = 0; k < m; ++k) {
      const double z = 1 - 2 * (k + 0.5) / m, r = std::sqrt(1 - z * z);
      d.push_back(vec3(r * std::cos(ga * k), r * std::sin(ga * k), z));
    }
  }
  return d;
}

bool wulff_ball_inside(const Domain& domain, const FinslerNorm& norm, const Vec& c, double r) {
  for (const Vec& d : sphere_directions(norm.dim()))
    if (!domain.contains(add(c, scaled(d, r / norm.polar(d))))) return false;
  return domain.contains(c);
}

// Cell energy of u restricted by corner classification: cells whose corners all lie
// outside W_r(c) are summed; for straddling cells `partial` is added instead.
double outer_cell_energy(const GridFunction& u, const FinslerNorm& norm, const Vec& c, double r,
                         const std::function<double(int, int, int)>& partial) {
  const Mesh& m = u.mesh();
  const int d = m.dim;
  if (d != 2 && d != 3) throw Error(Errc::unsupported_dimension, "cell energy supports n in {2, 3}");
  const double ih = 1.0 / m.h, hn = m.cell_measure();
  std::vector<std::uint8_t> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = norm.polar(sub(m.point(i), c)) >= r;
  const int corners = 1 << d;
  const int kmax = d == 3 ? m.n[2] - 1 : 1;
  double acc = 0.0, extra = 0.0;
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j + 1 < m.n[1]; ++j)
      for (int i = 0; i + 1 < m.n[0]; ++i) {
        double val[8];
        int nout = 0;
        for (int q = 0; q < corners; ++q) {
          const std::size_t id = m.index(i + (q & 1), j + ((q >> 1) & 1), k + ((q >> 2) & 1));
          val[q] = u[id];
          nout += out[id];
        }
        if (nout == 0) continue;
        if (nout < corners) {
          extra += partial(i, j, k);
          continue;
        }
        for (int q = 0; q < corners; ++q) {
          Vec g{};
          for (int a = 0; a < d; ++a) g[a] = (val[q | (1 << a)] - val[q & ~(1 << a)]) * ih;
          acc += std::pow(norm.F(g), d) / corners;
        }
      }
  return acc * hn + extra;
}

void require_2d_or_3d(const FinslerNorm& norm) {
  if (norm.dim() != 2 && norm.dim() != 3)
    throw Error(Errc::unsupported_dimension, "blow-up families support n in {2, 3}");
}

}  // namespace

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10 - 15 * s + 6 * s * s);
}

// ---------------- Moser family ----------------

MoserFunction build_moser_sequence(const MoserParams& p, const FinslerNorm& norm, const Domain& domain,
                                   const EigenPair* eig) {
  require_2d_or_3d(norm);
  const int n = norm.dim();
  if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) throw Error(Errc::invalid_argument, "epsilon must lie in (0, 1)");
  if (!(p.h > 0.0)) throw Error(Errc::invalid_argument, "h must be positive");
  const double L = std::log(1.0 / p.epsilon);
  const double kap = kappa_n(norm), lam = lambda_n(norm);

  MoserFunction m;
  m.epsilon = p.epsilon;
  m.center = p.center;
  const double a = p.t_exponent > 0.0 ? p.t_exponent : (2.0 * n + 1) / (2.0 * n * (n + 1));
  m.t_eps = p.t_eps > 0.0 ? p.t_eps : std::pow(L, -a);
  m.delta = 1.0 / (std::pow(m.t_eps, n) * L);
  if (!(m.epsilon < m.delta)) throw Error(Errc::invalid_argument, "need epsilon < delta");
  if (!wulff_ball_inside(domain, norm, p.center, 2 * m.delta))
    throw Error(Errc::domain_too_small, "W_{2 delta} is not contained in the domain");

  EigenPair own;
  if (!eig) {
    own = first_eigenpair(GridFunction::on_domain(domain, p.h), norm);
    eig = &own;
  }
  m.lambda1 = eig->lambda1;
  // phi with int F^n(grad phi) = 1
  GridFunction phi = eig->eigenfunction;
  const double ephi = dirichlet_energy(phi, norm);
  for (double& v : phi.values()) v *= std::pow(ephi, -1.0 / n);

  Vec e1{};
  e1[0] = 1.0;
  m.x_delta = add(p.center, scaled(e1, m.delta / norm.polar(e1)));
  m.phi_x_delta = phi.interpolate(m.x_delta);
  m.core_value = std::pow(n / lam * L, (n - 1.0) / n);

  const double A = m.core_value, tp = m.t_eps * m.phi_x_delta;
  const double span = std::log(m.delta / m.epsilon);
  m.energy_core = 0.0;
  m.energy_annulus = n * kap * std::pow(std::abs(A - tp), n) / std::pow(span, n - 1);
  m.annulus_expansion =
      1.0 - std::pow(n, (n + 1.0) / n) * std::pow(kap, 1.0 / n) * std::pow(L, -(n - 1.0) / n) * tp;

  const Mesh& mesh = phi.mesh();
  GridFunction outer = phi.zeros_like();
  for (std::size_t i = 0; i < outer.size(); ++i) {
    if (!outer.mask()[i]) continue;
    const double r = norm.polar(sub(mesh.point(i), p.center));
    const double th = smooth_step((r - m.delta) / m.delta);
    outer[i] = m.t_eps * (m.phi_x_delta + th * (phi[i] - m.phi_x_delta));
  }
  // constant on W_delta, so whole-grid energy sees only the outer region
  m.energy_outer = dirichlet_energy(outer, norm);
  m.energy_total = m.energy_core + m.energy_annulus + m.energy_outer;
  m.scale = std::pow(m.energy_total, 1.0 / n);

  m.v = outer;
  for (std::size_t i = 0; i < m.v.size(); ++i) {
    if (!m.v.mask()[i]) continue;
    const double r = norm.polar(sub(mesh.point(i), p.center));
    double val = outer[i];
    if (r <= m.epsilon)
      val = A;
    else if (r <= m.delta)
      val = A + (tp - A) * std::log(r / m.epsilon) / span;
    m.v[i] = val / m.scale;
  }
  return m;
}

namespace {

double moser_radial_value(const MoserFunction& m, double r) {
  const double A = m.core_value, tp = m.t_eps * m.phi_x_delta;
  if (r <= m.epsilon) return A / m.scale;
  return (A + (tp - A) * std::log(r / m.epsilon) / std::log(m.delta / m.epsilon)) / m.scale;
}

}  // namespace

JValue evaluate_moser_J(const MoserFunction& m, const MTConfig& cfg, const FinslerNorm& norm) {
  cfg.validate();
  const int n = norm.dim();
  const double kap = kappa_n(norm), q = n / (n - 1.0);
  const Mesh& mesh = m.v.mesh();
  const double hn = mesh.cell_measure();

  std::vector<double> rr(m.v.size());
  for (std::size_t i = 0; i < m.v.size(); ++i) rr[i] = norm.polar(sub(mesh.point(i), m.center));

  // |v|_n^n
  double N = kap * std::pow(m.epsilon, n) * std::pow(moser_radial_value(m, 0.0), n);
  N += radial_integral([&](double r) { return std::pow(moser_radial_value(m, r), n); }, m.epsilon, m.delta, n,
                       kap);
  for (std::size_t i = 0; i < m.v.size(); ++i)
    if (m.v.mask()[i] && rr[i] > m.delta) N += std::pow(std::abs(m.v[i]), n) * hn;

  const double beta = cfg.lambda * std::pow(1 + cfg.alpha * N, 1.0 / (n - 1));
  JValue out;
  auto ex = [&](double v, std::size_t& sat) {
    const double e = beta * std::pow(std::abs(v), q);
    if (e >= kExponentCap) {
      ++sat;
      return std::exp(kExponentCap);
    }
    return std::exp(e);
  };
  out.value = kap * std::pow(m.epsilon, n) * ex(moser_radial_value(m, 0.0), out.saturated_cells);
  std::size_t sat_mid = 0;
  out.value += radial_integral([&](double r) { return ex(moser_radial_value(m, r), sat_mid); }, m.epsilon,
                               m.delta, n, kap);
  if (sat_mid) ++out.saturated_cells;
  for (std::size_t i = 0; i < m.v.size(); ++i)
    if (m.v.mask()[i] && rr[i] > m.delta) out.value += ex(m.v[i], out.saturated_cells) * hn;
  return out;
}

DivergenceTable divergence_demo(double alpha, double lambda, const std::vector<double>& eps_ladder,
                                const FinslerNorm& norm, const Domain& domain, double h, double t_exponent) {
  require_2d_or_3d(norm);
  if (eps_ladder.empty()) throw Error(Errc::invalid_argument, "empty epsilon ladder");
  const int n = norm.dim();
  const EigenPair eig = first_eigenpair(GridFunction::on_domain(domain, h), norm);
  DivergenceTable t;
  t.lambda1 = eig.lambda1;
  t.alpha = alpha < 0.0 ? eig.lambda1 : alpha;
  t.lambda = lambda;
  const MTConfig cfg{lambda, t.alpha, 0.0};
  for (double eps : eps_ladder) {
    MoserParams p;
    p.epsilon = eps;
    p.h = h;
    p.t_exponent = t_exponent;
    const MoserFunction m = build_moser_sequence(p, norm, domain, &eig);
    const JValue j = evaluate_moser_J(m, cfg, norm);
    DivergenceRow r;
    r.epsilon = eps;
    r.t_eps = m.t_eps;
    r.delta = m.delta;
    r.J = j.value;
    r.log_J = std::log(j.value);
    r.growth_variable = std::pow(std::log(1 / eps), 1.0 / n) * m.t_eps;
    r.energy = m.energy_total / std::pow(m.scale, n);
    r.M = m.core_value / m.scale;
    r.saturated_cells = j.saturated_cells;
    t.rows.push_back(r);
  }
  t.strictly_increasing = true;
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (!(t.rows[i].J > t.rows[i - 1].J)) t.strictly_increasing = false;
  t.ratio = t.rows.back().J / t.rows.front().J;

  const double k = double(t.rows.size());
  double mx = 0, my = 0;
  for (const auto& r : t.rows) {
    mx += r.growth_variable / k;
    my += r.log_J / k;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& r : t.rows) {
    sxx += (r.growth_variable - mx) * (r.growth_variable - mx);
    sxy += (r.growth_variable - mx) * (r.log_J - my);
    syy += (r.log_J - my) * (r.log_J - my);
  }
  t.slope = sxx > 0 ? sxy / sxx : 0.0;
  t.correlation = sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  return t;
}

// ---------------- glued bubble ----------------

GluedBubble build_glued_bubble(const GluedParams& p, const FinslerNorm& norm, const Domain& domain,
                               const GreenResult* green) {
  require_2d_or_3d(norm);
  const int n = norm.dim();
  if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) throw Error(Errc::invalid_argument, "epsilon must lie in (0, 1)");
  if (!(p.h > 0.0)) throw Error(Errc::invalid_argument, "h must be positive");
  const double kap = kappa_n(norm), lam = lambda_n(norm), q = n / (n - 1.0);
  const double k = std::pow(kap, 1.0 / (n - 1));
  const double H = harmonic(n - 1);

  GluedBubble g;
  g.epsilon = p.epsilon;
  g.x0 = p.x0;
  g.R = -std::log(p.epsilon);
  const double Re = g.R * p.epsilon;
  g.rho = std::max(Re, p.blend_min_cells * p.h);
  if (!wulff_ball_inside(domain, norm, p.x0, 2 * g.rho))
    throw Error(Errc::domain_too_small, "W_{2 rho}(x0) is not contained in the domain");

  if (green) {
    g.green = *green;
  } else {
    GreenOptions go;
    const auto grid = GridFunction::on_domain(domain, p.h);
    if (p.alpha > 0.0) go.lambda1 = first_eigenpair(grid, norm).lambda1;
    g.green = green_function_nothrow_fit(grid, norm, p.alpha, p.x0, go);
  }
  g.green_fit_unstable = g.green.fit_unstable;
  g.C_G = g.green.C_G;
  g.c_n = g.green.c_n;
  g.G_norm_n = g.green.norm_n_pow;
  const double c = g.c_n;

  // constants from the energy expansion
  g.b_analytic = (n - 1.0) / lam * H;
  g.C_pow = -c * std::log(p.epsilon) + std::log(kap) / lam + g.C_G - (n - 1.0) / lam * H;
  if (!(g.C_pow > 0.0)) throw Error(Errc::constants_mismatch, "C^{n/(n-1)} is not positive");
  g.C = std::pow(g.C_pow, (n - 1.0) / n);
  g.D = std::pow(1 + p.alpha * g.G_norm_n / g.C_pow, 1.0 / n);

  auto w = [&](double s) { return -(n - 1.0) / lam * std::log1p(k * std::pow(s, q)); };
  auto wprime = [&](double s) {
    return s == 0.0 ? 0.0 : -(n / lam) * k * std::pow(s, 1.0 / (n - 1)) / (1 + k * std::pow(s, q));
  };
  auto G_asym = [&](double r) { return -c * std::log(r) + g.C_G; };

  // energies of the unscaled pieces
  g.energy_core = radial_integral([&](double s) { return std::pow(std::abs(wprime(s)), n); }, 0.0, g.R, n, kap);
  g.energy_annulus = c * std::log(g.rho / Re);

  const GridFunction& G = g.green.G;
  const Mesh& mesh = G.mesh();
  GridFunction blend = G.zeros_like();
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (!G.mask()[i]) continue;
    const double r = norm.polar(sub(mesh.point(i), p.x0));
    const double eta = 1.0 - smooth_step((r - g.rho) / g.rho);
    blend[i] = r > 0.0 ? (1 - eta) * G[i] + eta * G_asym(r) : G[i];
  }
  const int sub_n = 16;
  auto partial = [&](int i, int j, int kk) {
    // outside part of a straddling cell, with the log gradient c / F°
    const Vec base = mesh.point(i, j, kk);
    double s = 0.0;
    const int m3 = n == 3 ? sub_n : 1;
    for (int a = 0; a < sub_n; ++a)
      for (int b = 0; b < sub_n; ++b)
        for (int e = 0; e < m3; ++e) {
          Vec y = base;
          y[0] += (a + 0.5) * mesh.h / sub_n;
          y[1] += (b + 0.5) * mesh.h / sub_n;
          if (n == 3) y[2] += (e + 0.5) * mesh.h / sub_n;
          const double r = norm.polar(sub(y, p.x0));
          if (r >= g.rho) s += std::pow(c / r, n);
        }
    return s * mesh.cell_measure() / std::pow(sub_n, n);
  };
  g.energy_outer = outer_cell_energy(blend, norm, p.x0, g.rho, partial);

  const double E = g.energy_core + g.energy_annulus + g.energy_outer;
  g.energy_pre = E / (g.C_pow + p.alpha * g.G_norm_n);
  g.C_pow_numeric = E - p.alpha * g.G_norm_n;
  g.b_numeric = G_asym(Re) - g.C_pow_numeric - w(g.R);

  if (g.C_pow_numeric > 0.0) {
    const double Cn = std::pow(g.C_pow_numeric, (n - 1.0) / n);
    if (std::abs(Cn - g.C) > 0.05 * g.C) {
      std::ostringstream os;
      os << "C from continuity (" << Cn << ") and from the expansion (" << g.C << ") differ by more than 5%";
      throw Error(Errc::constants_mismatch, os.str());
    }
  } else {
    throw Error(Errc::constants_mismatch, "assembled energy leaves no room for C");
  }

  const double core_at_R = g.C_pow + w(g.R) + g.b_analytic;
  g.core_amplitude = g.C_pow + g.b_analytic;
  g.interface_jump = std::abs(core_at_R - G_asym(Re)) / g.core_amplitude;

  g.sweep = std::pow(g.energy_pre, 1.0 / n);
  g.scale = std::pow(g.C, -1.0 / (n - 1)) / g.D / g.sweep;
  g.energy_post = std::pow(g.scale, n) * E;

  g.phi = blend;
  for (std::size_t i = 0; i < g.phi.size(); ++i) {
    if (!g.phi.mask()[i]) continue;
    const double r = norm.polar(sub(mesh.point(i), p.x0));
    double v = blend[i];
    if (r <= Re)
      v = g.C_pow + w(r / p.epsilon) + g.b_analytic;
    else if (r <= g.rho)
      v = G_asym(r);
    g.phi[i] = g.scale * v;
  }
  g.core_amplitude *= g.scale;
  return g;
}

JValue evaluate_glued_J(const GluedBubble& g, double alpha, const FinslerNorm& norm) {
  const int n = norm.dim();
  const double kap = kappa_n(norm), lam = lambda_n(norm), q = n / (n - 1.0);
  const double k = std::pow(kap, 1.0 / (n - 1));
  const double Re = g.R * g.epsilon;
  auto value = [&](double r) {
    if (r <= Re) return g.scale * (g.C_pow - (n - 1.0) / lam * std::log1p(k * std::pow(r / g.epsilon, q)) + g.b_analytic);
    return g.scale * (-g.c_n * std::log(r) + g.C_G);
  };
  const Mesh& mesh = g.phi.mesh();
  const double hn = mesh.cell_measure();
  std::vector<double> rr(g.phi.size());
  for (std::size_t i = 0; i < rr.size(); ++i) rr[i] = norm.polar(sub(mesh.point(i), g.x0));

  auto pw = [&](double r) { return std::pow(std::abs(value(r)), n); };
  double N = radial_integral(pw, 0.0, Re, n, kap) + radial_integral(pw, Re, g.rho, n, kap);
  for (std::size_t i = 0; i < rr.size(); ++i)
    if (g.phi.mask()[i] && rr[i] > g.rho) N += std::pow(std::abs(g.phi[i]), n) * hn;

  const double beta = lam * std::pow(1 + alpha * N, 1.0 / (n - 1));
  JValue out;
  std::size_t sat = 0;
  auto ex = [&](double v, std::size_t& s) {
    const double e = beta * std::pow(std::abs(v), q);
    if (e >= kExponentCap) {
      ++s;
      return std::exp(kExponentCap);
    }
    return std::exp(e);
  };
  auto f = [&](double r) { return ex(value(r), sat); };
  out.value = radial_integral(f, 0.0, Re, n, kap) + radial_integral(f, Re, g.rho, n, kap);
  if (sat) ++out.saturated_cells;
  for (std::size_t i = 0; i < rr.size(); ++i)
    if (g.phi.mask()[i] && rr[i] > g.rho) out.value += ex(g.phi[i], out.saturated_cells) * hn;
  return out;
}

SandwichReport bound_sandwich(const FinslerNorm& norm, const Domain& domain, double alpha,
                              const std::vector<double>& eps_ladder, double h) {
  require_2d_or_3d(norm);
  const int n = norm.dim();
  const auto grid = GridFunction::on_domain(domain, h);
  GreenOptions go;
  if (alpha > 0.0) go.lambda1 = first_eigenpair(grid, norm).lambda1;
  // masked node nearest to the bounding box center
  const auto [lo, hi] = domain.bounding_box();
  const Vec mid = scaled(add(lo, hi), 0.5);
  std::size_t best = 0;
  double bd = INFINITY;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.mask()[i]) continue;
    const double dd = norm2(sub(grid.mesh().point(i), mid), n);
    if (dd < bd) bd = dd, best = i;
  }
  const Vec x0 = grid.mesh().point(best);
  const GreenResult gr = green_function_nothrow_fit(grid, norm, alpha, x0, go);

  SandwichReport rep;
  rep.domain_measure = domain.measure();
  rep.C_G = gr.C_G;
  rep.H = harmonic(n - 1);
  rep.B = rep.domain_measure + kappa_n(norm) * std::exp(lambda_n(norm) * gr.C_G + rep.H);
  for (double eps : eps_ladder) {
    GluedParams p;
    p.epsilon = eps;
    p.alpha = alpha;
    p.h = h;
    p.x0 = x0;
    const GluedBubble g = build_glued_bubble(p, norm, domain, &gr);
    const JValue j = evaluate_glued_J(g, alpha, norm);
    rep.rows.push_back({eps, j.value, g.energy_post, g.energy_pre, g.core_amplitude, g.interface_jump, g.b_numeric,
                        j.saturated_cells});
    rep.max_J = std::max(rep.max_J, j.value);
  }
  rep.exceeds = rep.max_J > rep.B;
  return rep;
}

// ---------------- binomial sums ----------------

std::vector<IdentityRow> harmonic_identities(int n_max) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  if (n_max < 2) throw Error(Errc::invalid_argument, "n_max must be at least 2");
  auto binom = [](int a, int b) {
    cpp_int r = 1;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  auto str = [](const cpp_rational& r) {
    std::ostringstream os;
    os << numerator(r) << "/" << denominator(r);
    return os.str();
  };
  std::vector<IdentityRow> rows;
  for (int n = 2; n <= n_max; ++n) {
    cpp_rational A = 0, B = 0, Hn = 0;
    for (int k = 0; k <= n - 2; ++k) {
      const int sa = (n - 1 - k) % 2 ? -1 : 1, sb = (n - k - 2) % 2 ? -1 : 1;
      A -= cpp_rational(binom(n - 1, k) * sa, cpp_int(n - k - 1));
      B += cpp_rational(binom(n - 2, k) * sb, cpp_int(n - k - 1));
    }
    for (int j = 1; j <= n - 1; ++j) Hn += cpp_rational(1, j);
    const cpp_rational rb(1, n - 1);
    rows.push_back({n, str(A), str(Hn), str(B), str(rb), A == Hn, B == rb});
  }
  return rows;
}

}  // namespace anisomt
