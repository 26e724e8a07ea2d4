#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "anisomt/energy.hpp"

using namespace anisomt;

namespace {

GridFunction full_box(double h) {
  // mask covers every node of [0,1]^2
  Mesh m = Mesh::covering(vec2(0, 0), vec2(1, 1), h, 2, 0);
  return GridFunction(m, std::vector<std::uint8_t>(m.size(), 1));
}

GridFunction random_on(const Domain& d, double h, std::uint64_t seed) {
  auto g = GridFunction::on_domain(d, h);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1, 1);
  g.fill([&](const Vec&) { return ud(rng); });
  return g;
}

}  // namespace

TEST_CASE("dirichlet_energy closed forms") {
  auto z = GridFunction::on_domain(Domain::disk(1.0), 1.0 / 32);
  CHECK(dirichlet_energy(z, FinslerNorm::euclidean(2)) == 0.0);

  auto lin = full_box(1.0 / 40);
  lin.fill([](const Vec& x) { return x[0]; });
  CHECK(dirichlet_energy(lin, FinslerNorm::euclidean(2)) == doctest::Approx(1.0).epsilon(1e-12));

  auto e = FinslerNorm::euclidean(2);
  auto cone = GridFunction::on_domain(Domain::disk(1.2), 1.0 / 128);
  cone.fill([&](const Vec& x) { return std::max(0.0, 1.0 - e.polar(x)); });
  CHECK(dirichlet_energy(cone, e) == doctest::Approx(std::numbers::pi).epsilon(0.02));

  // Anisotropic cone: F(grad F°) = 1, so the energy is the Wulff ball measure.
  auto p3 = FinslerNorm::weighted_p_norm(3.0, {1, 2});
  auto c3 = GridFunction::on_domain(Domain::disk(2.5), 1.0 / 128);
  c3.fill([&](const Vec& x) { return std::max(0.0, 1.0 - p3.polar(x)); });
  CHECK(dirichlet_energy(c3, p3) == doctest::Approx(kappa_n(p3)).epsilon(0.03));
}

TEST_CASE("euclidean n=2 energy equals the 5-point quadratic form") {
  auto u = random_on(Domain::disk(1.0), 0.1, 3);
  const Mesh& m = u.mesh();
  double s = 0.0;
  for (int j = 0; j < m.n[1]; ++j)
    for (int i = 0; i < m.n[0]; ++i) {
      double v = u[m.index(i, j)];
      if (i + 1 < m.n[0]) s += std::pow(u[m.index(i + 1, j)] - v, 2);
      if (j + 1 < m.n[1]) s += std::pow(u[m.index(i, j + 1)] - v, 2);
    }
  CHECK(dirichlet_energy(u, FinslerNorm::euclidean(2)) == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("kernel path and generic path agree") {
  auto u = random_on(Domain::disk(1.0), 0.05, 4);
  auto A = FinslerNorm::quadratic_form(2, {2.0, 0.4, 0.4, 1.0});
  EnergyOperator fast(u.mesh(), u.mask(), A);
  EnergyOperator slow(u.mesh(), u.mask(), A, kRegularization, nullptr, false);
  CHECK(fast.uses_kernel());
  CHECK_FALSE(slow.uses_kernel());
  std::vector<double> g1(u.size()), g2(u.size());
  double e1 = fast(u.values(), g1), e2 = slow(u.values(), g2);
  CHECK(e1 == doctest::Approx(e2).epsilon(1e-12));
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-10));

  EnergyOperator sc(u.mesh(), u.mask(), A, kRegularization, &kernels::scalar());
  std::vector<double> g3(u.size());
  CHECK(sc(u.values(), g3) == doctest::Approx(e1).epsilon(1e-13));
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(g3[i] == doctest::Approx(g1[i]).epsilon(1e-12));
}

TEST_CASE("energy gradient matches finite differences") {
  std::vector<FinslerNorm> norms{FinslerNorm::euclidean(2), FinslerNorm::weighted_p_norm(1.5, {1, 2}),
                                 FinslerNorm::weighted_p_norm(3.0, {1, 1}),
                                 FinslerNorm::quadratic_form(2, {4, 0, 0, 1})};
  for (const auto& f : norms) {
    auto u = random_on(Domain::disk(1.0), 0.1, 11);
    auto v = random_on(Domain::disk(1.0), 0.1, 12);
    EnergyOperator E(u.mesh(), u.mask(), f);
    std::vector<double> g(u.size());
    E(u.values(), g);
    double dd = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dd += g[i] * v[i];
    const double s = 1e-5;
    auto up = u, um = u;
    for (std::size_t i = 0; i < u.size(); ++i) up[i] += s * v[i], um[i] -= s * v[i];
    double fd = (E(up.values()) - E(um.values())) / (2 * s);
    CHECK(dd == doctest::Approx(fd).epsilon(1e-6));
  }
  // 3D generic path
  auto f3 = FinslerNorm::euclidean(3);
  auto u = random_on(Domain::disk(1.0, 3), 0.25, 21);
  auto v = random_on(Domain::disk(1.0, 3), 0.25, 22);
  EnergyOperator E(u.mesh(), u.mask(), f3);
  std::vector<double> g(u.size());
  E(u.values(), g);
  double dd = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dd += g[i] * v[i];
  auto up = u, um = u;
  for (std::size_t i = 0; i < u.size(); ++i) up[i] += 1e-5 * v[i], um[i] -= 1e-5 * v[i];
  CHECK(dd == doctest::Approx((E(up.values()) - E(um.values())) / 2e-5).epsilon(1e-6));
}

TEST_CASE("qn_residual") {
  auto z = GridFunction::on_domain(Domain::disk(1.0), 0.1);
  auto r = qn_residual(z, z, 0.0, FinslerNorm::euclidean(2));
  CHECK(r.max_abs() == 0.0);
  CHECK_THROWS_AS(qn_residual(z, z, 0.0, FinslerNorm::weighted_p_norm(1.0, {1, 1})), Error);
  // Euclidean n=2: -Q_2 u is the 5-point negative Laplacian.
  auto u = random_on(Domain::disk(1.0), 0.1, 5);
  auto q = neg_qn(u, FinslerNorm::euclidean(2));
  const Mesh& m = u.mesh();
  const double h2 = m.h * m.h;
  for (int j = 1; j + 1 < m.n[1]; ++j)
    for (int i = 1; i + 1 < m.n[0]; ++i) {
      auto id = m.index(i, j);
      if (!u.mask()[id]) continue;
      double lap = (4 * u[id] - u[m.index(i + 1, j)] - u[m.index(i - 1, j)] - u[m.index(i, j + 1)] -
                    u[m.index(i, j - 1)]) / h2;
      CHECK(q[id] == doctest::Approx(lap).epsilon(1e-10));
    }
}
