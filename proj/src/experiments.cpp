#include "anisomt/experiments.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <map>

#include <Eigen/Core>
#include <boost/crc.hpp>
#include <boost/version.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "anisomt/blowup.hpp"
#include "anisomt/kernels.hpp"
#include "anisomt/radial.hpp"
#include "anisomt/symmetrization.hpp"

#ifndef ANISOMT_VERSION
#define ANISOMT_VERSION "0.0.0"
#endif

namespace anisomt {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string g17(double v) { return fmt::format("{:.17g}", v); }

class Csv {
 public:
  Csv(const fs::path& p, const std::vector<std::string>& header) : os_(p) {
    if (!os_) throw Error(Errc::io_error, "cannot write " + p.string());
    row_strings(header);
  }
  template <typename... T>
  void row(const T&... v) {
    std::vector<std::string> cells{cell(v)...};
    row_strings(cells);
  }

 private:
  static std::string cell(double v) { return g17(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  void row_strings(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    os_ << line << '\n';
  }
  std::ofstream os_;
};

struct Ctx {
  const Config& cfg;
  fs::path out;
  std::uint64_t seed;
  std::optional<int> n_max;
  std::vector<std::string> files;

  fs::path file(const std::string& name) {
    files.push_back(name);
    return out / name;
  }
  void write_json(const std::string& name, const json& j) {
    std::ofstream os(file(name));
    if (!os) throw Error(Errc::io_error, "cannot write " + name);
    os << j.dump(2) << '\n';
  }
  void write_grid(const std::string& name, const GridFunction& u) {
    std::ofstream os(file(name));
    if (!os) throw Error(Errc::io_error, "cannot write " + name);
    u.write_csv(os);
  }
};

// Test field for symmetrize / isoperimetric.
GridFunction field_from(const Config& c, const FinslerNorm& norm, const Domain& dom, double h) {
  auto u = GridFunction::on_domain(dom, h);
  const int d = norm.dim();
  const std::string kind = c.string("field.kind", "bump");
  const Vec ctr = point_from(c, "field.center", d);
  if (kind == "bump") {
    const double w = c.number("field.width", 0.4);
    if (!(w > 0.0)) throw Error(Errc::config_error, "field.width must be positive");
    u.fill([&](const Vec& x) {
      const Vec y = sub(x, ctr);
      return std::exp(-dot(y, y, d) / (w * w));
    });
  } else if (kind == "cone") {
    const double r = c.number("field.radius", 0.8);
    u.fill([&](const Vec& x) { return std::max(0.0, r - norm2(sub(x, ctr), d)); });
  } else if (kind == "wulff_cone") {
    const double r = c.number("field.radius", 0.8);
    u.fill([&](const Vec& x) { return std::max(0.0, r - norm.polar(sub(x, ctr))); });
  } else if (kind == "indicator") {
    u.fill([](const Vec&) { return 1.0; });
  } else {
    throw Error(Errc::config_error, "field.kind: unknown field '" + kind + "'");
  }
  return u;
}

json norm_json(const FinslerNorm& f) { return {{"describe", f.describe()}, {"dim", f.dim()}}; }

Vec domain_center(const Domain& d) {
  const auto [lo, hi] = d.bounding_box();
  return scaled(add(lo, hi), 0.5);
}

// ---------------- subcommands ----------------

void cmd_norm_check(Ctx& c) {
  const auto f = norm_from(c.cfg);
  const int samples = int(c.cfg.integer("norm_check.samples", 1000));
  if (samples <= 0) throw Error(Errc::config_error, "norm_check.samples must be positive");
  const auto r = duality_check(f, samples, c.seed);
  const double tol = r.analytic ? 1e-6 : 1e-4;
  c.write_json("norm_check.json", {{"norm", norm_json(f)},
                                   {"samples", r.samples},
                                   {"analytic", r.analytic},
                                   {"triangle", r.triangle},
                                   {"gradient_bounds", r.gradient_bounds},
                                   {"euler", r.euler},
                                   {"unit_dual", r.unit_dual},
                                   {"inversion", r.inversion},
                                   {"sign_homogeneity", r.sign_homog},
                                   {"max_violation", r.max_violation()},
                                   {"tolerance", tol},
                                   {"pass", r.max_violation() < tol}});
}

void cmd_kappa(Ctx& c) {
  const auto f = norm_from(c.cfg);
  c.write_json("kappa.json", {{"kappa", kappa_n(f)}, {"lambda_n", lambda_n(f)}, {"norm", norm_json(f)}});
}

void cmd_symmetrize(Ctx& c) {
  const auto f = norm_from(c.cfg);
  const auto dom = domain_from(c.cfg, f.dim());
  const double h = mesh_spacing(c.cfg);
  const auto u = field_from(c.cfg, f, dom, h);
  const auto s = convex_symmetrize(u, f);
  c.write_grid("input.csv", u);
  c.write_grid("symmetrized.csv", s);
  json j;
  j["h"] = h;
  for (const auto& [name, g] : {std::pair{"input", &u}, std::pair{"symmetrized", &s}})
    j[name] = {{"L1", g->lp_norm(1)}, {"L2", g->lp_norm(2)}, {"max", g->max_abs()}, {"support_measure", g->mask_measure()}};
  c.write_json("symmetrize.json", j);
}

void cmd_isoperimetric(Ctx& c) {
  const auto f = norm_from(c.cfg);
  const auto dom = domain_from(c.cfg, f.dim());
  const double h = mesh_spacing(c.cfg);
  const auto u = field_from(c.cfg, f, dom, h);
  const double top = u.max_abs();
  auto levels = ladder_from(c.cfg, "isoperimetric.levels", {0.1, 0.3, 0.5, 0.7, 0.9});
  Csv csv(c.file("isoperimetric.csv"), {"level", "t", "perimeter", "area", "ratio", "empty"});
  for (double l : levels) {
    const auto r = isoperimetric_ratio(u, l * top, f);
    csv.row(l, l * top, r.set.perimeter, r.set.area, r.ratio, r.set.empty_set);
  }
  const int nl = int(c.cfg.integer("isoperimetric.coarea_levels", std::lround(1 / h)));
  const auto co = coarea_check(u, f, nl);
  c.write_json("isoperimetric.json", {{"h", h},
                                      {"coarea",
                                       {{"gradient_integral", co.gradient_integral},
                                        {"level_integral", co.level_integral},
                                        {"discrepancy", co.discrepancy},
                                        {"levels", co.levels}}}});
}

void cmd_eigen(Ctx& c) {
  const auto f = norm_from(c.cfg);
  const auto dom = domain_from(c.cfg, f.dim());
  const double h = mesh_spacing(c.cfg);
  EigenOptions o;
  o.tol = c.cfg.number("eigen.tol", o.tol);
  o.max_outer = int(c.cfg.integer("eigen.max_outer", o.max_outer));
  const auto e = first_eigenpair(GridFunction::on_domain(dom, h), f, o);
  c.write_grid("eigenfunction.csv", e.eigenfunction);
  c.write_json("eigen.json", {{"lambda1", e.lambda1},
                              {"outer_iterations", e.outer_iterations},
                              {"sign_restarts", e.sign_restarts},
                              {"h", h},
                              {"domain", dom.describe()},
                              {"norm", norm_json(f)}});
}

void cmd_solve(Ctx& c) {
  const auto f = norm_from(c.cfg);
  const auto dom = domain_from(c.cfg, f.dim());
  const double h = mesh_spacing(c.cfg);
  auto src = GridFunction::on_domain(dom, h);
  const double s = c.cfg.number("solve.source", 1.0);
  src.fill([&](const Vec&) { return s; });
  SolveOptions o;
  o.tol_rel = c.cfg.number("solve.tol", o.tol_rel);
  o.max_iter = int(c.cfg.integer("solve.max_iter", o.max_iter));
  std::ofstream tel(c.file("solve_telemetry.csv"));
  o.sink = csv_sink(tel);
  SolveStats st;
  const auto u = dirichlet_solve(src, f, o, &st);
  c.write_grid("solution.csv", u);
  c.write_json("solve.json", {{"iterations", st.iterations},
                              {"evaluations", st.evaluations},
                              {"residual", st.residual},
                              {"energy", st.energy},
                              {"max_u", u.max_abs()},
                              {"h", h},
                              {"kernel", std::string(kernels::active().name)}});
}

void cmd_bubble(Ctx& c) {
  const auto f = norm_from(c.cfg);
  const double r_max = c.cfg.number("bubble.r_max", 20.0);
  const int m = int(c.cfg.integer("bubble.points", 20000));
  if (!(r_max > 10.0) || m < 100) throw Error(Errc::config_error, "bubble: need r_max > 10 and points >= 100");
  const auto w = bubble(f, uniform_radii(r_max, m));
  const auto res = bubble_residual(w);
  const auto mass = bubble_mass(w, r_max);
  const auto q = radial_neg_qn(w);
  const double lam = lambda_n(f), n = f.dim();
  Csv csv(c.file("bubble_profile.csv"), {"r", "w", "neg_qn", "source"});
  const int stride = std::max(1, m / 2000);
  for (int i = 1; i < m; i += stride) csv.row(w.radii[i], w.values[i], q[i], std::exp(n / (n - 1) * lam * w.values[i]));
  json j{{"norm", norm_json(f)},
         {"residual", res},
         {"mass", {{"total", mass.total}, {"quadrature", mass.quadrature}, {"tail", mass.tail}}}};
  if (c.cfg.has("bubble.grid_h")) {
    const auto g = bubble_grid_check(f, c.cfg.number("bubble.grid_h"), c.cfg.number("bubble.r_check", 2.0));
    j["grid_check"] = {{"h", g.h}, {"max_rel_dev", g.max_rel_dev}, {"max_abs_dev", g.max_abs_dev}, {"nodes", g.nodes}};
  }
  c.write_json("bubble.json", j);
}

void cmd_green(Ctx& c) {
  const auto f = norm_from(c.cfg);
  const auto dom = domain_from(c.cfg, f.dim());
  const double h = mesh_spacing(c.cfg);
  const double alpha = c.cfg.number("green.alpha", 0.0);
  const Vec x0 = c.cfg.has("green.x0") ? point_from(c.cfg, "green.x0", f.dim()) : domain_center(dom);
  const auto grid = GridFunction::on_domain(dom, h);
  GreenOptions o;
  if (alpha > 0.0) o.lambda1 = first_eigenpair(grid, f).lambda1;
  const auto g = green_function(grid, f, alpha, x0, o);
  c.write_grid("green.csv", g.G);
  json j{{"C_G", g.C_G},
         {"gamma", g.gamma},
         {"fit_residual", g.fit_residual},
         {"psi_inner", g.psi_inner},
         {"c_n", g.c_n},
         {"fit_unstable", g.fit_unstable},
         {"fixed_point_iterations", g.fixed_point_iterations},
         {"annulus_nodes", g.annulus_nodes},
         {"norm_n_pow", g.norm_n_pow},
         {"alpha", alpha},
         {"h", h}};
  if (o.lambda1) j["lambda1"] = *o.lambda1;
  c.write_json("green.json", j);
}

void cmd_maximize(Ctx& c) {
  const auto f = norm_from(c.cfg);
  const auto dom = domain_from(c.cfg, f.dim());
  MaximizeOptions o;
  o.h = mesh_spacing(c.cfg);
  o.max_iter = int(c.cfg.integer("maximize.max_iter", o.max_iter));
  o.jitter = c.cfg.number("maximize.jitter", 0.0);
  o.stationarity_tol = c.cfg.number("maximize.tol", o.stationarity_tol);
  o.seed = c.seed;
  const double alpha = c.cfg.number("maximize.alpha", 0.0);
  const auto ladder = ladder_from(c.cfg, "maximize.eps_sub", {0.5, 0.2, 0.1});
  Csv csv(c.file("maximize.csv"), {"eps_sub_fraction", "lambda", "J", "M_eps", "r_eps", "constraint_residual",
                                   "el_residual_norm", "alpha_eps", "beta_eps", "gamma_eps", "lambda_eps",
                                   "iterations", "saturated", "start"});
  json reports = json::array();
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const auto cfg = MTConfig::subcritical(f, ladder[k] * lambda_n(f), alpha);
    const auto r = maximize_subcritical(cfg, f, dom, o);
    const auto& m = r.report;
    csv.row(ladder[k], cfg.lambda, m.J_value, m.M_eps, m.r_eps, m.constraint_residual, m.el_residual_norm,
            m.el.alpha_eps, m.el.beta_eps, m.el.gamma_eps, m.el.lambda_eps, m.iterations, m.saturated, m.start);
    json e = json::parse(to_json(m));
    json starts = json::array();
    for (const auto& s : r.starts)
      starts.push_back({{"name", s.name}, {"J_start", s.J_start}, {"J_final", s.J_final},
                        {"iterations", s.iterations}, {"converged", s.converged}});
    reports.push_back({{"eps_sub_fraction", ladder[k]}, {"report", e}, {"starts", starts}});
    c.write_grid(fmt::format("maximizer_{}.csv", k), r.u);
  }
  c.write_json("maximize.json", {{"alpha", alpha}, {"h", o.h}, {"runs", reports}});
}

void cmd_moser(Ctx& c) {
  const auto f = norm_from(c.cfg);
  const auto dom = domain_from(c.cfg, f.dim());
  const double h = mesh_spacing(c.cfg);
  double alpha = -1.0;  // lambda1
  if (c.cfg.has("moser.alpha")) {
    const auto& v = c.cfg.values().at("moser.alpha");
    if (std::holds_alternative<std::string>(v)) {
      if (std::get<std::string>(v) != "lambda1") throw Error(Errc::config_error, "moser.alpha: number or \"lambda1\"");
    } else {
      alpha = c.cfg.number("moser.alpha");
      if (alpha < 0.0) throw Error(Errc::config_error, "moser.alpha must be nonnegative");
    }
  }
  const double lam = c.cfg.number("moser.lambda", lambda_n(f));
  const auto eps = ladder_from(c.cfg, "moser.eps", {1e-2, 1e-3, 1e-4});
  const double a = c.cfg.number("moser.t_exponent", 0.0);
  if (a < 0.0) throw Error(Errc::config_error, "moser.t_exponent must be positive");
  const auto t = divergence_demo(alpha, lam, eps, f, dom, h, a);
  Csv csv(c.file("moser.csv"), {"epsilon", "t_eps", "delta", "growth_variable", "J", "log_J", "energy", "M",
                                "interface_jump", "saturated_cells"});
  // v_eps is continuous by construction: interface_jump is identically 0
  for (const auto& r : t.rows)
    csv.row(r.epsilon, r.t_eps, r.delta, r.growth_variable, r.J, r.log_J, r.energy, r.M, 0.0, r.saturated_cells);
  c.write_json("moser.json", {{"alpha", t.alpha},
                              {"lambda", t.lambda},
                              {"lambda1", t.lambda1},
                              {"ratio", t.ratio},
                              {"strictly_increasing", t.strictly_increasing},
                              {"slope", t.slope},
                              {"correlation", t.correlation},
                              {"h", h}});
}

void cmd_glued(Ctx& c) {
  const auto f = norm_from(c.cfg);
  const auto dom = domain_from(c.cfg, f.dim());
  const double h = mesh_spacing(c.cfg, 1.0 / 128);
  const double alpha = c.cfg.number("glued.alpha", 0.0);
  const auto eps = ladder_from(c.cfg, "glued.eps", {1e-2, 1e-3, 1e-4});
  const auto s = bound_sandwich(f, dom, alpha, eps, h);
  Csv csv(c.file("glued.csv"),
          {"epsilon", "J", "energy", "M", "interface_jump", "saturated_cells", "energy_pre", "b_numeric"});
  for (const auto& r : s.rows)
    csv.row(r.epsilon, r.J, r.energy, r.M, r.interface_jump, r.saturated_cells, r.energy_pre, r.b_numeric);
  const int n = f.dim();
  c.write_json("glued.json", {{"B", s.B},
                              {"domain_measure", s.domain_measure},
                              {"C_G", s.C_G},
                              {"H", s.H},
                              {"b_target", (n - 1.0) / lambda_n(f) * s.H},
                              {"max_J", s.max_J},
                              {"exceeds", s.exceeds},
                              {"alpha", alpha},
                              {"h", h}});
}

bool cmd_identities(Ctx& c) {
  const int n_max = c.n_max ? *c.n_max : int(c.cfg.integer("identities.n_max", 12));
  const auto rows = harmonic_identities(n_max);
  std::ofstream os(c.file("identities.txt"));
  bool all = true;
  for (const auto& r : rows) {
    const std::string line =
        fmt::format("n={:<3} A: {} = {} [{}]   B: {} = {} [{}]", r.n, r.lhs_a, r.rhs_a, r.a_holds ? "exact" : "FAIL",
                    r.lhs_b, r.rhs_b, r.b_holds ? "exact" : "FAIL");
    os << line << '\n';
    fmt::print("{}\n", line);
    all = all && r.a_holds && r.b_holds;
  }
  return all;
}

json versions() {
  return {{"anisomt", ANISOMT_VERSION},
          {"compiler", fmt::format("{} {}", __VERSION__, __cplusplus)},
          {"boost", BOOST_LIB_VERSION},
          {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
          {"fmt", FMT_VERSION},
          {"config_parser", config_backend_version()},
          {"json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                               NLOHMANN_JSON_VERSION_PATCH)},
          {"kernel", std::string(kernels::active().name)}};
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"norm-check", "kappa", "symmetrize", "isoperimetric",
                                              "eigen",      "solve", "bubble",     "green",
                                              "maximize",   "moser", "glued",      "identities"};
  return names;
}

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::degenerate_norm:
    case Errc::non_convergence:
    case Errc::sign_flip:
    case Errc::fit_unstable:
    case Errc::domain_too_small:
    case Errc::constants_mismatch:
    case Errc::saturation:
      return kExitNumerical;
    default:
      return kExitConfig;
  }
}

std::uint32_t file_crc32(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  boost::crc_32_type crc;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    crc.process_bytes(buf, std::size_t(in.gcount()));
  }
  return crc.checksum();
}

RunResult run_experiment(const RunRequest& req) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  RunResult res;
  static const std::map<std::string, std::function<bool(Ctx&)>> table{
      {"norm-check", [](Ctx& c) { return cmd_norm_check(c), true; }},
      {"kappa", [](Ctx& c) { return cmd_kappa(c), true; }},
      {"symmetrize", [](Ctx& c) { return cmd_symmetrize(c), true; }},
      {"isoperimetric", [](Ctx& c) { return cmd_isoperimetric(c), true; }},
      {"eigen", [](Ctx& c) { return cmd_eigen(c), true; }},
      {"solve", [](Ctx& c) { return cmd_solve(c), true; }},
      {"bubble", [](Ctx& c) { return cmd_bubble(c), true; }},
      {"green", [](Ctx& c) { return cmd_green(c), true; }},
      {"maximize", [](Ctx& c) { return cmd_maximize(c), true; }},
      {"moser", [](Ctx& c) { return cmd_moser(c), true; }},
      {"glued", [](Ctx& c) { return cmd_glued(c), true; }},
      {"identities", cmd_identities},
  };

  std::error_code ec;
  fs::create_directories(req.out, ec);
  if (ec || !fs::is_directory(req.out)) {
    res.exit_code = kExitConfig;
    res.error = "IoError: cannot create output directory " + req.out.string();
    return res;
  }

  std::uint64_t seed = 1;
  Ctx ctx{req.config, req.out, 1, req.n_max, {}};
  json err;
  try {
    auto it = table.find(req.subcommand);
    if (it == table.end()) throw Error(Errc::config_error, "unknown subcommand '" + req.subcommand + "'");
    seed = req.seed ? *req.seed : seed_from(req.config);
    ctx.seed = seed;
    if (!it->second(ctx)) {
      res.exit_code = kExitNumerical;
      res.error = "identity check failed";
    }
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.code());
    res.error = std::string(errc_name(e.code())) + ": " + e.what();
    err = {{"code", errc_name(e.code())}, {"message", e.what()}, {"subcommand", req.subcommand}};
  } catch (const std::exception& e) {
    res.exit_code = kExitNumerical;
    res.error = std::string("Internal: ") + e.what();
    err = {{"code", "Internal"}, {"message", e.what()}, {"subcommand", req.subcommand}};
  }
  if (!err.is_null()) {
    try {
      ctx.write_json("error.json", err);
    } catch (const Error&) {
    }
  }

  for (const auto& f : ctx.files) {
    const fs::path p = req.out / f;
    if (!fs::exists(p)) continue;
    res.artifacts.push_back({f, fs::file_size(p), file_crc32(p)});
  }
  json arts = json::array();
  for (const auto& a : res.artifacts)
    arts.push_back({{"file", a.file}, {"bytes", a.bytes}, {"crc32", fmt::format("{:08x}", a.crc32)}});
  const double wall = std::chrono::duration<double>(clock::now() - t0).count();
  json manifest{{"subcommand", req.subcommand},
                {"exit_code", res.exit_code},
                {"config_path", req.config_path},
                {"seed", seed},
                {"config_echo", req.config.echo()},
                {"config_text", req.config.text()},
                {"versions", versions()},
                {"wall_time_s", wall},
                {"artifacts", arts}};
  if (!res.error.empty()) manifest["error"] = res.error;
  std::ofstream os(req.out / "manifest.json");
  os << manifest.dump(2) << '\n';
  return res;
}

}  // namespace anisomt
