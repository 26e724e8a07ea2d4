#include <doctest.h>

#include <cmath>
#include <numbers>

#include "anisomt/blowup.hpp"
#include "anisomt/error.hpp"

using namespace anisomt;

namespace {

const double pi = std::numbers::pi;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::io_error;  // nothing thrown
}

// shared eigenpair on the radius-2 disk
const EigenPair& disk2_eig() {
  static const EigenPair e =
      first_eigenpair(GridFunction::on_domain(Domain::disk(2.0), 1.0 / 32), FinslerNorm::euclidean(2));
  return e;
}

}  // namespace

TEST_CASE("quintic cutoff") {
  CHECK(smooth_step(-1.0) == 0.0);
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(2.0) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  double prev = 0.0, slope = 0.0;
  for (int k = 1; k <= 1000; ++k) {
    const double s = k / 1000.0, v = smooth_step(s);
    CHECK(v >= prev);
    slope = std::max(slope, (v - prev) * 1000);
    prev = v;
  }
  CHECK(slope <= 1.875 + 1e-3);  // max derivative 15/8
}

TEST_CASE("binomial sums are exact") {
  auto rows = harmonic_identities(12);
  REQUIRE(rows.size() == 11);
  CHECK(rows[0].n == 2);
  CHECK(rows[0].lhs_a == "1/1");
  CHECK(rows[1].lhs_a == "3/2");
  CHECK(rows[1].rhs_b == "1/2");
  for (const auto& r : rows) {
    INFO(r.n);
    CHECK(r.a_holds);
    CHECK(r.b_holds);
    CHECK(r.lhs_a == r.rhs_a);
    CHECK(r.lhs_b == r.rhs_b);
  }
  CHECK(rows.back().rhs_a == "83711/27720");
  CHECK_THROWS_AS(harmonic_identities(1), Error);
}

TEST_CASE("Moser family construction") {
  auto e = FinslerNorm::euclidean(2);
  const auto dom = Domain::disk(2.0);
  MoserParams p;
  p.h = 1.0 / 32;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    p.epsilon = eps;
    auto m = build_moser_sequence(p, e, dom, &disk2_eig());
    const double L = std::log(1 / eps);
    CHECK(m.core_value == doctest::Approx(std::sqrt(2 / lambda_n(e) * L)).epsilon(1e-14));
    CHECK(m.t_eps == doctest::Approx(std::pow(L, -5.0 / 12)).epsilon(1e-14));
    CHECK(m.delta * m.t_eps * m.t_eps * L == doctest::Approx(1.0));
    CHECK(m.epsilon < m.delta);
    CHECK(std::abs(m.energy_total / std::pow(m.scale, 2) - 1.0) < 1e-10);
    // the grid samples carry the normalized core value at the center
    CHECK(m.v.max_abs() == doctest::Approx(m.core_value / m.scale).epsilon(1e-12));
    CHECK(m.phi_x_delta > 0.0);

    // log annulus energy vs midpoint quadrature of the profile in log r
    const double A = m.core_value, tp = m.t_eps * m.phi_x_delta;
    const int k = 100000;
    const double a = std::log(eps), b = std::log(m.delta);
    double quad = 0.0;
    for (int i = 0; i < k; ++i) {
      const double t0 = a + (b - a) * i / k, t1 = a + (b - a) * (i + 1) / k;
      const double g = ((tp - A) * (t1 - a) / (b - a) - (tp - A) * (t0 - a) / (b - a)) / (std::exp(t1) - std::exp(t0));
      const double r = std::exp(0.5 * (t0 + t1));
      quad += 2 * pi * g * g * r * (std::exp(t1) - std::exp(t0));
    }
    CHECK(m.energy_annulus == doctest::Approx(quad).epsilon(1e-6));
  }
  p.epsilon = 1e-4;
  auto m = build_moser_sequence(p, e, dom, &disk2_eig());
  CHECK(m.energy_annulus == doctest::Approx(m.annulus_expansion).epsilon(0.10));

  // W_{2 delta} does not fit in the unit disk for these epsilons
  CHECK(code_of([&] { build_moser_sequence(p, e, Domain::disk(1.0), &disk2_eig()); }) == Errc::domain_too_small);
  p.epsilon = 0.0;
  CHECK(code_of([&] { build_moser_sequence(p, e, dom, &disk2_eig()); }) == Errc::invalid_argument);
}

TEST_CASE("Moser J against a radial quadrature") {
  auto e = FinslerNorm::euclidean(2);
  MoserParams p;
  p.h = 1.0 / 32;
  p.epsilon = 1e-3;
  auto m = build_moser_sequence(p, e, Domain::disk(2.0), &disk2_eig());
  const double lam = lambda_n(e);
  // v is radial on the disk; outside delta read it off the grid along x
  auto v = [&](double r) {
    if (r <= m.epsilon) return m.core_value / m.scale;
    if (r <= m.delta)
      return (m.core_value + (m.t_eps * m.phi_x_delta - m.core_value) * std::log(r / m.epsilon) /
                                 std::log(m.delta / m.epsilon)) /
             m.scale;
    return m.v.interpolate(vec2(r, 0.0));
  };
  for (double alpha : {0.0, 1.0}) {
    const int k = 400000;
    double N = 0.0, J = 0.0;
    // geometric in r on [1e-9, 2]
    const double a = std::log(1e-9), b = std::log(2.0);
    for (int i = 0; i < k; ++i) {
      const double t = a + (b - a) * (i + 0.5) / k, r = std::exp(t);
      N += 2 * pi * std::pow(v(r), 2) * r * r * (b - a) / k;
    }
    const double beta = lam * (1 + alpha * N);
    for (int i = 0; i < k; ++i) {
      const double t = a + (b - a) * (i + 0.5) / k, r = std::exp(t);
      J += 2 * pi * std::exp(beta * v(r) * v(r)) * r * r * (b - a) / k;
    }
    // the grid sum misses the boundary layer of the radius-2 disk
    J -= pi * 4 - GridFunction::on_domain(Domain::disk(2.0), p.h).mask_measure();
    INFO(alpha);
    CHECK(evaluate_moser_J(m, {lam, alpha, 0.0}, e).value == doctest::Approx(J).epsilon(0.01));
  }
}

TEST_CASE("divergence dichotomy trend") {
  auto e = FinslerNorm::euclidean(2);
  const std::vector<double> ladder{1e-2, 1e-3, 1e-4, 1e-6};
  auto up = divergence_demo(-1.0, lambda_n(e), ladder, e, Domain::disk(2.0), 1.0 / 32);
  CHECK(up.alpha == up.lambda1);
  CHECK(up.lambda1 == doctest::Approx(5.7832 / 4).epsilon(0.02));
  CHECK(up.strictly_increasing);
  CHECK(up.ratio > 1.0);
  CHECK(up.correlation > 0.9);
  CHECK(up.slope > 0.0);
  for (const auto& r : up.rows) {
    CHECK(r.energy == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.saturated_cells == 0);
  }
  auto flat = divergence_demo(0.0, lambda_n(e), ladder, e, Domain::disk(2.0), 1.0 / 32);
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : flat.rows) {
    lo = std::min(lo, r.J);
    hi = std::max(hi, r.J);
  }
  CHECK(hi / lo < 2.0);
  for (std::size_t i = 0; i < ladder.size(); ++i) CHECK(up.rows[i].J > flat.rows[i].J);
}

TEST_CASE("glued bubble on the unit disk") {
  auto e = FinslerNorm::euclidean(2);
  const auto dom = Domain::disk(1.0);
  GluedParams p;
  p.h = 1.0 / 128;
  p.epsilon = 1e-3;
  auto g = build_glued_bubble(p, e, dom);
  const double target = 1 / lambda_n(e);  // (n-1)/lambda_n H_1
  CHECK(g.b_analytic == doctest::Approx(target).epsilon(1e-14));
  CHECK(g.b_numeric == doctest::Approx(target).epsilon(0.10));
  CHECK(g.energy_pre >= 0.95);
  CHECK(g.energy_pre <= 1.05);
  CHECK(std::abs(g.energy_post - 1.0) < 1e-6);
  CHECK(g.interface_jump < 0.02);
  CHECK(g.R == doctest::Approx(std::log(1000.0)));
  CHECK(g.rho == doctest::Approx(std::max(g.R * 1e-3, 8 * p.h)));
  CHECK(std::abs(g.C_G) < 0.02);
  // peak sits at x0 with the core amplitude
  CHECK(g.phi.max_abs() == doctest::Approx(g.core_amplitude).epsilon(1e-12));
  CHECK(g.phi[g.phi.argmax()] > 0.0);
  const auto gr = g.green;

  double prev_jump = 1.0, prev_err = 1.0;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    p.epsilon = eps;
    auto ge = build_glued_bubble(p, e, dom, &gr);
    INFO(eps);
    CHECK(ge.interface_jump < prev_jump);
    const double err = std::abs(ge.b_numeric - target);
    CHECK(err < prev_err);
    prev_jump = ge.interface_jump;
    prev_err = err;
  }

  p.epsilon = 1e-2;
  p.x0 = vec2(0.95, 0.0);
  CHECK(code_of([&] { build_glued_bubble(p, e, dom, &gr); }) == Errc::domain_too_small);
  p.x0 = {};
  auto bad = gr;
  bad.C_G += 0.5;
  CHECK(code_of([&] { build_glued_bubble(p, e, dom, &bad); }) == Errc::constants_mismatch);
}

TEST_CASE("glued J against a radial quadrature") {
  auto e = FinslerNorm::euclidean(2);
  GluedParams p;
  p.h = 1.0 / 64;
  p.epsilon = 1e-2;
  auto g = build_glued_bubble(p, e, Domain::disk(1.0));
  const double lam = lambda_n(e), Re = g.R * g.epsilon;
  auto phi = [&](double r) {
    if (r <= Re) return g.scale * (g.C_pow - std::log1p(pi * std::pow(r / g.epsilon, 2)) / lam + g.b_analytic);
    if (r <= g.rho) return g.scale * (-g.c_n * std::log(r) + g.C_G);
    return g.phi.interpolate(vec2(r, 0.0));
  };
  const int k = 400000;
  const double a = std::log(1e-10), b = 0.0;
  double J = 0.0;
  for (int i = 0; i < k; ++i) {
    const double r = std::exp(a + (b - a) * (i + 0.5) / k);
    J += 2 * pi * std::exp(lam * phi(r) * phi(r)) * r * r * (b - a) / k;
  }
  J -= pi - g.phi.mask_measure();
  CHECK(evaluate_glued_J(g, 0.0, e).value == doctest::Approx(J).epsilon(0.01));
  CHECK(evaluate_glued_J(g, 1.0, e).value > evaluate_glued_J(g, 0.0, e).value);
}

TEST_CASE("bound sandwich on the unit disk") {
  auto e = FinslerNorm::euclidean(2);
  auto s = bound_sandwich(e, Domain::disk(1.0), 0.0, {1e-2, 1e-3, 1e-4}, 1.0 / 128);
  CHECK(s.B > s.domain_measure);
  CHECK(s.H == 1.0);
  CHECK(s.B == doctest::Approx(pi + pi * std::exp(1.0)).epsilon(0.01));
  REQUIRE(s.rows.size() == 3);
  CHECK(s.max_J > 0.95 * s.B);
  CHECK(s.exceeds == (s.max_J > s.B));
  for (const auto& r : s.rows) {
    CHECK(r.saturated_cells == 0);
    CHECK(r.interface_jump < 0.02);
  }
}

TEST_CASE("glued bubble with a quadratic norm") {
  auto A = FinslerNorm::quadratic_form(2, {2, 0.5, 0.5, 1});
  GluedParams p;
  p.h = 1.0 / 64;
  p.epsilon = 1e-3;
  auto g = build_glued_bubble(p, A, Domain::disk(1.0));
  CHECK(g.b_numeric == doctest::Approx(g.b_analytic).epsilon(0.10));
  CHECK(g.energy_pre == doctest::Approx(1.0).epsilon(0.05));
  CHECK(g.interface_jump < 0.02);
}
