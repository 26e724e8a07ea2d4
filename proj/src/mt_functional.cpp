#include "anisomt/mt_functional.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "anisomt/radial.hpp"

namespace anisomt {

MTConfig MTConfig::subcritical(const FinslerNorm& norm, double eps_sub, double alpha) {
  MTConfig c;
  c.epsilon_sub = eps_sub;
  c.lambda = lambda_n(norm) - eps_sub;
  c.alpha = alpha;
  c.validate();
  return c;
}

void MTConfig::validate() const {
  if (!(lambda > 0.0)) throw Error(Errc::invalid_argument, "MTConfig: lambda must be positive");
  if (!(alpha >= 0.0)) throw Error(Errc::invalid_argument, "MTConfig: alpha must be nonnegative");
  if (!(epsilon_sub >= 0.0)) throw Error(Errc::invalid_argument, "MTConfig: epsilon_sub must be nonnegative");
}

namespace {

double nnorm_pow(const GridFunction& u) {
  const int n = u.mesh().dim;
  const double hn = u.mesh().cell_measure();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.mask()[i]) s += std::pow(std::abs(u[i]), n);
  return s * hn;
}

// Shared pieces of J and its gradient.
struct JState {
  double n = 2, hn = 0, N = 0, a = 0;  // a = lambda (1 + alpha N)^{1/(n-1)}
  double J = 0, S = 0;                 // S = int e^Phi |u|^{n/(n-1)}
  std::size_t saturated = 0;
};

JState j_state(const GridFunction& u, const MTConfig& cfg) {
  JState s;
  s.n = u.mesh().dim;
  s.hn = u.mesh().cell_measure();
  s.N = nnorm_pow(u);
  s.a = cfg.lambda * std::pow(1.0 + cfg.alpha * s.N, 1.0 / (s.n - 1));
  const double q = s.n / (s.n - 1);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!u.mask()[i]) continue;
    const double p = std::pow(std::abs(u[i]), q);
    double phi = s.a * p;
    if (phi > kExponentCap) {
      phi = kExponentCap;
      ++s.saturated;
    }
    const double e = std::exp(phi);
    s.J += e;
    s.S += e * p;
  }
  s.J *= s.hn;
  s.S *= s.hn;
  return s;
}

// Euclidean gradient of J with respect to nodal values.
void j_gradient(const GridFunction& u, const MTConfig& cfg, const JState& s, std::vector<double>& g) {
  const double n = s.n;
  const double q = n / (n - 1);
  const double c1 = s.a * q;
  const double c2 = s.S * (cfg.lambda / (n - 1)) * std::pow(1.0 + cfg.alpha * s.N, (2.0 - n) / (n - 1)) *
                    cfg.alpha * n * s.hn;
  g.assign(u.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!u.mask()[i]) continue;
    const double v = u[i], av = std::abs(v);
    const double phi = std::min(kExponentCap, s.a * std::pow(av, q));
    const double sg = v < 0 ? -1.0 : 1.0;
    g[i] = s.hn * std::exp(phi) * c1 * sg * std::pow(av, 1.0 / (n - 1)) + c2 * sg * std::pow(av, n - 1);
  }
}

}  // namespace

JValue evaluate_J(const GridFunction& u, const MTConfig& cfg) {
  cfg.validate();
  const JState s = j_state(u, cfg);
  return {s.J, s.saturated};
}

void project_to_constraint(GridFunction& u, const FinslerNorm& norm) {
  const double e = dirichlet_energy(u, norm);
  if (!(e > 0.0)) throw Error(Errc::invalid_argument, "cannot project the zero function");
  const double s = std::pow(e, -1.0 / u.mesh().dim);
  for (double& v : u.values()) v *= s;
}

namespace {

struct ELEval {
  ELParams p;
  double rel = 0.0, source_scale = 0.0;
};

ELEval el_eval(const GridFunction& u, const MTConfig& cfg, const FinslerNorm& norm) {
  const int n = u.mesh().dim;
  const double hn = u.mesh().cell_measure();
  const double N = nnorm_pow(u);
  ELEval r;
  r.p.alpha_eps = cfg.lambda * std::pow(1.0 + cfg.alpha * N, 1.0 / (n - 1));
  r.p.beta_eps = (1.0 + cfg.alpha * N) / (1.0 + 2.0 * cfg.alpha * N);
  r.p.gamma_eps = cfg.alpha / (1.0 + 2.0 * cfg.alpha * N);
  const double q = double(n) / (n - 1);
  double lam = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.mask()[i]) {
      const double p = std::pow(std::abs(u[i]), q);
      lam += p * std::exp(std::min(kExponentCap, r.p.alpha_eps * p));
    }
  r.p.lambda_eps = lam * hn;
  if (!(r.p.lambda_eps > 0.0)) return r;
  const GridFunction lhs = neg_qn(u, norm);
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!u.mask()[i]) continue;
    const double v = std::abs(u[i]);
    const double src = r.p.beta_eps / r.p.lambda_eps * std::pow(v, 1.0 / (n - 1)) *
                           std::exp(std::min(kExponentCap, r.p.alpha_eps * std::pow(v, q))) +
                       r.p.gamma_eps * std::pow(v, n - 1);
    r.source_scale = std::max(r.source_scale, std::abs(src));
    worst = std::max(worst, std::abs(lhs[i] - src));
  }
  r.rel = r.source_scale > 0.0 ? worst / r.source_scale : 0.0;
  return r;
}

double blowup_radius(const ELParams& p, double M, int n) {
  const double q = double(n) / (n - 1);
  const double rn = p.lambda_eps / p.beta_eps * std::pow(M, -q) * std::exp(-p.alpha_eps * std::pow(M, q));
  return std::pow(rn, 1.0 / n);
}

}  // namespace

MTReport el_verify(const GridFunction& u, const MTConfig& cfg, const FinslerNorm& norm) {
  cfg.validate();
  const int n = u.mesh().dim;
  MTReport r;
  const JState s = j_state(u, cfg);
  r.J_value = s.J;
  r.saturated = s.saturated > 0;
  r.domain_measure = u.mask_measure();
  r.constraint_residual = std::abs(std::pow(dirichlet_energy(u, norm), 1.0 / n) - 1.0);
  const ELEval e = el_eval(u, cfg, norm);
  r.el = e.p;
  r.el_residual_norm = e.rel;
  r.el_source_scale = e.source_scale;
  const std::size_t am = u.argmax();
  r.M_eps = std::abs(u[am]);
  r.x_eps = u.mesh().point(am);
  if (r.M_eps > 0.0 && r.el.lambda_eps > 0.0) r.r_eps = blowup_radius(r.el, r.M_eps, n);
  return r;
}

namespace {

struct AscentOutcome {
  int iterations = 0;
  bool converged = false;
  double J = 0.0;
};

AscentOutcome ascend(GridFunction& u, const MTConfig& cfg, const FinslerNorm& norm, const MaximizeOptions& opt,
                     std::vector<double>* history) {
  const int n = u.mesh().dim;
  const double hn = u.mesh().cell_measure();
  project_to_constraint(u, norm);
  JState s = j_state(u, cfg);
  AscentOutcome out;
  std::vector<double> g;
  GridFunction d = u.zeros_like();
  GridFunction trial = u;
  for (int it = 0;; ++it) {
    out.iterations = it;
    out.J = s.J;
    if (history) history->push_back(s.J);
    if (s.saturated) throw Error(Errc::saturation, "exponent cap reached during ascent; epsilon_sub too small for h");
    const ELEval e = el_eval(u, cfg, norm);
    if (opt.sink) opt.sink({it, s.J, e.rel});
    if (e.rel < opt.stationarity_tol) {
      out.converged = true;
      break;
    }
    if (it >= opt.max_iter) break;
    // tangential gradient and its Sobolev representative
    j_gradient(u, cfg, s, g);
    double gu = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) gu += g[i] * u[i];
    std::vector<double> gE(u.size());
    EnergyOperator E(u.mesh(), u.mask(), norm);
    E(u.values(), gE);
    GridFunction f = u.zeros_like();
    for (std::size_t i = 0; i < u.size(); ++i)
      if (u.mask()[i]) f[i] = (g[i] - gu / n * gE[i]) / hn;
    SolveOptions so = opt.inner;
    so.initial = &d;
    d = dirichlet_solve(f, norm, so);
    double slope = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) slope += f[i] * hn * d[i];
    if (!(slope > 0.0)) {
      out.converged = e.rel < 1e-4;
      break;
    }
    double step = opt.initial_step;
    bool ok = false;
    JState st;
    for (int k = 0; k < 40; ++k) {
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + step * d[i];
      project_to_constraint(trial, norm);
      st = j_state(trial, cfg);
      if (st.J > s.J && st.J >= s.J + opt.armijo * step * slope) {
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) {
      // no measurable ascent left at this resolution
      out.converged = e.rel < 1e-4;
      break;
    }
    std::swap(u, trial);
    s = st;
  }
  for (double& v : u.values()) v = std::abs(v);
  return out;
}

}  // namespace

MaximizeResult maximize_subcritical(const MTConfig& cfg, const FinslerNorm& norm, const Domain& domain,
                                    const MaximizeOptions& opt) {
  cfg.validate();
  if (!(cfg.epsilon_sub > 0.0) || cfg.lambda >= lambda_n(norm))
    throw Error(Errc::invalid_argument, "maximize_subcritical needs lambda < lambda_n");
  require_pde_norm(norm);
  const GridFunction dom = GridFunction::on_domain(domain, opt.h);
  const Mesh& m = dom.mesh();
  EigenOptions eo;
  eo.inner = opt.inner;
  EigenPair ep = first_eigenpair(dom, norm, eo);
  if (cfg.alpha >= ep.lambda1)
    throw Error(Errc::invalid_argument,
                fmt::format("alpha = {} must stay below lambda1 = {}", cfg.alpha, ep.lambda1));

  const Vec xc = m.point(ep.eigenfunction.argmax());
  double R = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!dom.mask()[i]) R = std::min(R, norm.polar(sub(m.point(i), xc)));

  std::vector<std::pair<std::string, GridFunction>> starts;
  {
    GridFunction c = dom.zeros_like();
    c.fill([&](const Vec& x) { return std::max(0.0, 1.0 - norm.polar(sub(x, xc)) / R); });
    starts.emplace_back("wulff_cone", std::move(c));
  }
  starts.emplace_back("eigenfunction", ep.eigenfunction);
  {
    const double rho = std::max(4.0 * opt.h, R / 16.0);
    GridFunction l = dom.zeros_like();
    l.fill([&](const Vec& x) {
      const double r = norm.polar(sub(x, xc));
      return std::clamp(std::log(R / std::max(r, 1e-300)) / std::log(R / rho), 0.0, 1.0);
    });
    starts.emplace_back("truncated_log", std::move(l));
  }
  if (opt.jitter > 0.0) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (auto& [name, v] : starts) {
      const double amp = opt.jitter * v.max_abs();
      for (std::size_t i = 0; i < v.size(); ++i)
        if (v.mask()[i]) v[i] = std::max(0.0, v[i] + amp * ud(rng));
    }
  }

  MaximizeResult best;
  double bestJ = -1.0;
  for (auto& [name, v] : starts) {
    StartRecord rec;
    rec.name = name;
    {
      GridFunction p = v;
      project_to_constraint(p, norm);
      rec.J_start = j_state(p, cfg).J;
    }
    const AscentOutcome o = ascend(v, cfg, norm, opt, nullptr);
    rec.J_final = o.J;
    rec.iterations = o.iterations;
    rec.converged = o.converged;
    best.starts.push_back(rec);
    if (o.J > bestJ) {
      bestJ = o.J;
      best.u = v;
      best.report.start = name;
      best.report.iterations = o.iterations;
    }
  }
  bool any = false;
  for (const auto& r : best.starts) any = any || r.converged;
  if (!any)
    throw Error(Errc::non_convergence, fmt::format("no start reached stationarity within {} iterations", opt.max_iter));
  MTReport rep = el_verify(best.u, cfg, norm);
  rep.start = best.report.start;
  rep.iterations = best.report.iterations;
  best.report = rep;
  return best;
}

ConcentrationReport concentration_diagnostics(const GridFunction& u, const MTConfig& cfg, const FinslerNorm& norm,
                                              const ConcentrationOptions& opt) {
  const int n = u.mesh().dim;
  const double h = u.mesh().h;
  ConcentrationReport c;
  const MTReport r = el_verify(u, cfg, norm);
  c.M_eps = r.M_eps;
  c.x_eps = r.x_eps;
  c.r_eps = r.r_eps;
  c.mesh_too_coarse = c.r_eps < 2.0 * h;
  const double q = double(n) / (n - 1);
  c.lambda_over_M = c.M_eps > 0 ? r.el.lambda_eps / std::pow(c.M_eps, q) : 0.0;
  const double scale = std::pow(c.M_eps, 1.0 / (n - 1));
  auto w_eps = [&](const Vec& y) { return scale * (u.interpolate(add(c.x_eps, scaled(y, c.r_eps))) - c.M_eps); };
  c.w0 = w_eps(Vec{});
  const RadialFunction wb = bubble(norm, {0.0, 1.0});
  const double Rp = opt.profile_radius;
  Vec ext{};
  for (int d = 0; d < n; ++d) {
    Vec e{};
    e[d] = 1.0;
    ext[d] = Rp * norm.F(e);
  }
  const int s = opt.samples;
  std::array<int, 3> idx{0, 0, 0};
  const int kmax = n == 3 ? s : 0;
  for (idx[2] = 0; idx[2] <= kmax; ++idx[2])
    for (idx[1] = 0; idx[1] <= s; ++idx[1])
      for (idx[0] = 0; idx[0] <= s; ++idx[0]) {
        Vec y{};
        for (int d = 0; d < n; ++d) y[d] = -ext[d] + 2.0 * ext[d] * idx[d] / s;
        const double fo = norm.polar(y);
        if (fo > Rp) continue;
        c.bubble_deviation = std::max(c.bubble_deviation, std::abs(w_eps(y) - wb(fo)));
      }
  if (opt.with_green) {
    GreenResult g = green_function_nothrow_fit(u, norm, cfg.alpha, c.x_eps);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!u.mask()[i]) continue;
      if (norm.polar(sub(u.mesh().point(i), c.x_eps)) < opt.green_exclusion) continue;
      worst = std::max(worst, std::abs(scale * u[i] - g.G[i]));
    }
    c.green_deviation = worst;
  }
  return c;
}

std::string to_json(const MTReport& r) {
  nlohmann::ordered_json j;
  j["J_value"] = r.J_value;
  j["domain_measure"] = r.domain_measure;
  j["constraint_residual"] = r.constraint_residual;
  j["el_params"] = {{"alpha_eps", r.el.alpha_eps},
                    {"beta_eps", r.el.beta_eps},
                    {"gamma_eps", r.el.gamma_eps},
                    {"lambda_eps", r.el.lambda_eps}};
  j["M_eps"] = r.M_eps;
  j["x_eps"] = {r.x_eps[0], r.x_eps[1], r.x_eps[2]};
  j["r_eps"] = r.r_eps;
  j["el_residual_norm"] = r.el_residual_norm;
  j["el_source_scale"] = r.el_source_scale;
  j["saturated"] = r.saturated;
  j["start"] = r.start;
  j["iterations"] = r.iterations;
  return j.dump(2);
}

}  // namespace anisomt
