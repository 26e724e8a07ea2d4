#include <doctest.h>

#include <cmath>
#include <numbers>

#include "anisomt/radial.hpp"

using namespace anisomt;

TEST_CASE("bubble profile closed form") {
  auto e = FinslerNorm::euclidean(2);
  auto w = bubble(e, {0.0, 0.5, 1.0, 2.0, 5.0});
  CHECK(w.values[0] == 0.0);
  CHECK(w.values[2] == doctest::Approx(-std::log(1 + std::numbers::pi) / (4 * std::numbers::pi)).epsilon(1e-14));
  for (std::size_t i = 1; i < w.values.size(); ++i) CHECK(w.values[i] < w.values[i - 1]);
  CHECK(w(0.75) == doctest::Approx(-std::log(1 + std::numbers::pi * 0.5625) / (4 * std::numbers::pi)));
  CHECK_THROWS_AS(bubble(e, {0.0, 1.0, 1.0}), Error);

  // n = 3: w = -(2/lambda_3) log(1 + kappa^{1/2} r^{3/2})
  auto e3 = FinslerNorm::euclidean(3);
  const double k3 = 4 * std::numbers::pi / 3;
  const double l3 = std::pow(3.0, 1.5) * std::sqrt(k3);
  auto w3 = bubble(e3, {0.0, 2.0});
  CHECK(w3.values[1] == doctest::Approx(-(2 / l3) * std::log(1 + std::sqrt(k3) * std::pow(2.0, 1.5))));
}

TEST_CASE("linear interpolation without a closed form") {
  RadialFunction w{{0.0, 1.0, 3.0}, {2.0, 1.0, 0.0}, FinslerNorm::euclidean(2), {}};
  CHECK(w(0.5) == doctest::Approx(1.5));
  CHECK(w(2.0) == doctest::Approx(0.5));
  CHECK(w(7.0) == 0.0);
  CHECK(w(-1.0) == 2.0);
}

TEST_CASE("radial reduction residual and refinement") {
  for (const auto& f : {FinslerNorm::euclidean(2), FinslerNorm::euclidean(3),
                        FinslerNorm::weighted_p_norm(3.0, {1, 2}), FinslerNorm::quadratic_form(2, {4, 0, 0, 1})}) {
    const double r1 = bubble_residual(bubble(f, uniform_radii(10.0, 10000)));
    const double r2 = bubble_residual(bubble(f, uniform_radii(10.0, 20000)));
    CHECK(r1 < 1e-3);
    CHECK(r1 / r2 >= 3.0);
  }
  // near the origin the source tends to e^0 = 1
  auto w = bubble(FinslerNorm::euclidean(2), uniform_radii(0.01, 100));
  auto q = radial_neg_qn(w);
  CHECK(q[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("bubble mass") {
  for (const auto& f : {FinslerNorm::euclidean(2), FinslerNorm::euclidean(3),
                        FinslerNorm::weighted_p_norm(1.5, {1, 2})}) {
    auto w = bubble(f, {0.0, 1.0});
    auto m = bubble_mass(w, 1e4);
    CHECK(m.total == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(m.tail > 0.0);
    double prev = 0.0;
    for (double R : {0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e3}) {
      const double p = bubble_mass(w, R).quadrature;
      CHECK(p >= prev);
      CHECK(p <= 1.0 + 1e-6);
      prev = p;
    }
  }
  // quadrature alone approaches 1 at the rate of the tail, (n-1)/T for large T
  auto w2 = bubble(FinslerNorm::euclidean(2), {0.0, 1.0});
  auto m = bubble_mass(w2, 100.0);
  CHECK(1.0 - m.quadrature == doctest::Approx(1.0 / (1.0 + std::numbers::pi * 1e4)).epsilon(1e-6));
}

TEST_CASE("grid operator matches the radial reduction inside W_2") {
  for (const auto& f : {FinslerNorm::euclidean(2), FinslerNorm::quadratic_form(2, {4, 0, 0, 1}),
                        FinslerNorm::quadratic_form(2, {2, 0.5, 0.5, 1})}) {
    auto c1 = bubble_grid_check(f, 1.0 / 32);
    auto c2 = bubble_grid_check(f, 1.0 / 64);
    CHECK(c2.max_rel_dev < 0.05);
    CHECK(c2.max_rel_dev < c1.max_rel_dev / 3);
  }
}
