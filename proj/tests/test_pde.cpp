#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "anisomt/pde.hpp"

using namespace anisomt;

namespace {
const double pi = std::numbers::pi;
const double j01 = 2.404825557695773;
}  // namespace

TEST_CASE("ncg minimizes a non-quadratic convex function") {
  // sum_i (x_i - i)^4 + (x_i - i)^2
  Objective obj = [](std::span<const double> x, std::span<double> g) {
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = x[i] - double(i);
      e += d * d * d * d + d * d;
      g[i] = 4 * d * d * d + 2 * d;
    }
    return e;
  };
  std::vector<double> x(20, 0.0);
  NcgOptions o;
  o.tol = 1e-10;
  std::vector<double> energies;
  o.sink = [&](const IterRecord& r) { energies.push_back(r.energy); };
  auto r = ncg_minimize(obj, x, o);
  CHECK(r.converged);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == doctest::Approx(double(i)).epsilon(1e-9));
  for (std::size_t i = 1; i < energies.size(); ++i) CHECK(energies[i] <= energies[i - 1] * (1 + 1e-14) + 1e-300);
}

TEST_CASE("dirichlet_solve: zero source gives zero") {
  auto f = GridFunction::on_domain(Domain::disk(1.0), 1.0 / 32);
  auto u = dirichlet_solve(f, FinslerNorm::euclidean(2));
  CHECK(u.max_abs() == 0.0);
}

TEST_CASE("dirichlet_solve: Poisson on the unit disk") {
  auto f = GridFunction::on_domain(Domain::disk(1.0), 1.0 / 128);
  f.fill([](const Vec&) { return 1.0; });
  std::vector<double> energies;
  SolveOptions so;
  so.sink = [&](const IterRecord& r) { energies.push_back(r.energy); };
  SolveStats st;
  auto u = dirichlet_solve(f, FinslerNorm::euclidean(2), so, &st);
  CHECK(st.residual < 1e-9 * 2);
  double err = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!u.mask()[i]) continue;
    Vec x = u.mesh().point(i);
    err = std::max(err, std::abs(u[i] - (1 - dot(x, x, 2)) / 4));
  }
  CHECK(err / 0.25 < 0.01);
  // energy descent
  for (std::size_t i = 1; i < energies.size(); ++i)
    CHECK(energies[i] <= energies[i - 1] + 1e-13 * std::abs(energies[i - 1]));
  // residual from the independent operator
  auto r = qn_residual(u, f, 0.0, FinslerNorm::euclidean(2));
  CHECK(r.max_abs() < 2e-9);
}

TEST_CASE("dirichlet_solve: l^3 norm gives Wulff-radial solution") {
  auto p3 = FinslerNorm::weighted_p_norm(3.0, {1, 1});
  const double h = 1.0 / 64;
  auto f = GridFunction::on_domain(Domain::wulff(p3, 1.0), h);
  f.fill([](const Vec&) { return 1.0; });
  SolveOptions so;
  so.tol_rel = 1e-8;
  auto u = dirichlet_solve(f, p3, so);
  // radial reduction: u = (1 - F°^2)/4 ; level set radius sqrt(1 - 4u) vs F°(x)
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!u.mask()[i]) continue;
    Vec x = u.mesh().point(i);
    double r = p3.polar(x);
    if (r < 0.3 || r > 0.9) continue;
    worst = std::max(worst, std::abs(std::sqrt(std::max(0.0, 1 - 4 * u[i])) - r));
  }
  CHECK(worst < 2 * h);
  MESSAGE("l3 level-set deviation in cells: " << worst / h);
}

TEST_CASE("dirichlet_solve rejects degenerate norms") {
  auto f = GridFunction::on_domain(Domain::disk(1.0), 0.1);
  CHECK_THROWS_AS(dirichlet_solve(f, FinslerNorm::weighted_p_norm(1.0, {1, 1})), Error);
}

TEST_CASE("dirichlet_solve NonConvergence on tiny budgets") {
  auto f = GridFunction::on_domain(Domain::disk(1.0), 1.0 / 32);
  f.fill([](const Vec&) { return 1.0; });
  SolveOptions so;
  so.max_iter = 3;
  try {
    dirichlet_solve(f, FinslerNorm::euclidean(2), so);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_convergence);
  }
}

TEST_CASE("telemetry CSV sink") {
  std::ostringstream os;
  auto f = GridFunction::on_domain(Domain::disk(1.0), 1.0 / 16);
  f.fill([](const Vec&) { return 1.0; });
  SolveOptions so;
  so.sink = csv_sink(os);
  dirichlet_solve(f, FinslerNorm::euclidean(2), so);
  CHECK(os.str().rfind("iteration,energy,residual\n0,", 0) == 0);
}

TEST_CASE("first eigenpair: disk, square, scaling") {
  auto e = FinslerNorm::euclidean(2);
  auto disk = GridFunction::on_domain(Domain::disk(1.0), 1.0 / 64);
  auto ep = first_eigenpair(disk, e);
  CHECK(ep.lambda1 == doctest::Approx(j01 * j01).epsilon(0.015));
  CHECK(ep.eigenfunction.lp_norm(2) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < disk.size(); ++i)
    if (disk.mask()[i]) CHECK(ep.eigenfunction[i] > 0.0);
  CHECK(rayleigh_quotient(ep.eigenfunction, e) == doctest::Approx(ep.lambda1).epsilon(1e-12));

  auto sq = GridFunction::on_domain(Domain::square(1.0), 1.0 / 64);
  auto es = first_eigenpair(sq, e);
  CHECK(es.lambda1 == doctest::Approx(2 * pi * pi).epsilon(0.01));

  auto disk2 = GridFunction::on_domain(Domain::disk(2.0), 1.0 / 32);
  auto e2 = first_eigenpair(disk2, e);
  CHECK(e2.lambda1 == doctest::Approx(ep.lambda1 / 4).epsilon(0.01));

  // Rayleigh lower bound on random positive test functions
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ud(0, 1);
  for (int s = 0; s < 50; ++s) {
    auto v = disk.zeros_like();
    double a = ud(rng), b = ud(rng), c = 1 + 3 * ud(rng);
    v.fill([&](const Vec& x) { return std::pow(1 - dot(x, x, 2), c) * (1 + a * x[0] + b * x[1] * x[1]) + 0.1 * ud(rng); });
    CHECK(rayleigh_quotient(v, e) >= ep.lambda1 * (1 - 1e-8));
  }
}

TEST_CASE("eigenvalue under a quadratic form matches the mapped Euclidean problem") {
  // F = sqrt(xi^T diag(4,1) xi) on the unit square maps to the Laplacian on [0,1/2]x[0,1].
  auto A = FinslerNorm::quadratic_form(2, {4, 0, 0, 1});
  auto sq = GridFunction::on_domain(Domain::square(1.0), 1.0 / 64);
  auto ep = first_eigenpair(sq, A);
  CHECK(ep.lambda1 == doctest::Approx(5 * pi * pi).epsilon(0.02));
}

TEST_CASE("Green function of the disk") {
  auto e = FinslerNorm::euclidean(2);
  auto disk = GridFunction::on_domain(Domain::disk(1.0), 1.0 / 128);
  auto g = green_function(disk, e, 0.0, vec2(0, 0));
  CHECK(std::abs(g.C_G) < 0.02);
  CHECK(g.gamma == doctest::Approx(1.0).epsilon(0.05));
  CHECK(g.c_n == doctest::Approx(1 / (2 * pi)));
  MESSAGE("C_G=" << g.C_G << " gamma=" << g.gamma << " psi_inner=" << g.psi_inner << " rms=" << g.fit_residual);
  // away from the source, G is close to -log|x|/(2 pi)
  for (double r : {0.25, 0.5, 0.75}) CHECK(g.G.interpolate(vec2(r, 0)) == doctest::Approx(-std::log(r) / (2 * pi)).epsilon(0.01));

  GreenOptions o;
  o.lambda1 = 5.0;
  CHECK_THROWS_AS(green_function(disk, e, 5.5, vec2(0, 0), o), Error);
  auto ga = green_function(disk, e, 2.0, vec2(0, 0));
  CHECK(ga.C_G > g.C_G);
  CHECK(ga.fixed_point_iterations > 1);
}
