#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "anisomt/finsler_norm.hpp"

using namespace anisomt;

namespace {

const double pi = std::numbers::pi;

FinslerNorm diag41() { return FinslerNorm::quadratic_form(2, {4, 0, 0, 1}); }

// Brute-force polar on a direction grid; independent of the library path.
double grid_polar(const FinslerNorm& f, const Vec& x, int samples) {
  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    double t = 2 * pi * k / samples;
    Vec u = vec2(std::cos(t), std::sin(t));
    best = std::max(best, dot(x, u, 2) / f.F(u));
  }
  return best;
}

}  // namespace

TEST_CASE("eval_F closed forms") {
  CHECK(eval_F(FinslerNorm::euclidean(2), vec2(3, 4)) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(eval_F(FinslerNorm::weighted_p_norm(1.0, {1, 1}), vec2(1, -2)) == doctest::Approx(3.0));
  CHECK(eval_F(diag41(), vec2(1, 0)) == doctest::Approx(2.0));
  CHECK(eval_F(FinslerNorm::euclidean(2), vec2(0, 0)) == 0.0);
  auto inf = FinslerNorm::weighted_p_norm(INFINITY, {1, 2});
  CHECK(inf.F(vec2(3, -2)) == doctest::Approx(4.0));
}

TEST_CASE("grad_F") {
  auto g = grad_F(FinslerNorm::euclidean(2), vec2(3, 4));
  CHECK(g[0] == doctest::Approx(0.6));
  CHECK(g[1] == doctest::Approx(0.8));

  // p = 2 against central differences computed here.
  auto p2 = FinslerNorm::weighted_p_norm(2.0, {1, 1});
  auto ga = p2.grad_F(vec2(1, 1));
  const double h = 1e-6;
  double fdx = (p2.F(vec2(1 + h, 1)) - p2.F(vec2(1 - h, 1))) / (2 * h);
  double fdy = (p2.F(vec2(1, 1 + h)) - p2.F(vec2(1, 1 - h))) / (2 * h);
  CHECK(ga[0] == doctest::Approx(fdx).epsilon(1e-8));
  CHECK(ga[1] == doctest::Approx(fdy).epsilon(1e-8));
  CHECK(ga[0] == doctest::Approx(1 / std::sqrt(2.0)));

  CHECK_THROWS_AS(grad_F(p2, vec2(0, 0)), Error);
  try {
    grad_F(p2, vec2(0, 0));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::zero_vector);
  }
}

TEST_CASE("Euler identity for every bundled family") {
  std::vector<FinslerNorm> norms{FinslerNorm::euclidean(2), FinslerNorm::weighted_p_norm(1.5, {1, 2}),
                                 FinslerNorm::weighted_p_norm(3.0, {1, 1}), diag41(),
                                 FinslerNorm::quadratic_form(3, {2, 0.3, 0, 0.3, 1, 0.1, 0, 0.1, 3})};
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (const auto& f : norms)
    for (int s = 0; s < 200; ++s) {
      Vec x{};
      for (int i = 0; i < f.dim(); ++i) x[i] = nd(rng);
      CHECK(std::abs(dot(x, f.grad_F(x), f.dim()) - f.F(x)) < 1e-8 * f.F(x));
    }
  // Polygonal support function uses finite differences.
  auto hex = FinslerNorm::sampled_support({0, pi / 3, 2 * pi / 3}, {1, 1, 1});
  for (int s = 0; s < 200; ++s) {
    Vec x = vec2(nd(rng), nd(rng));
    CHECK(std::abs(dot(x, hex.grad_F(x), 2) - hex.F(x)) < 1e-5 * hex.F(x));
  }
}

TEST_CASE("polar closed forms against grid maximization") {
  CHECK(polar(FinslerNorm::euclidean(2), vec2(3, 4)) == doctest::Approx(5.0));
  CHECK(polar(FinslerNorm::weighted_p_norm(1.0, {1, 1}), vec2(1, 1)) == doctest::Approx(1.0));
  CHECK(polar(diag41(), vec2(1, 0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(grid_polar(diag41(), vec2(1, 0), 10000) == doctest::Approx(0.5).epsilon(1e-6));
  auto p15 = FinslerNorm::weighted_p_norm(1.5, {1, 3});
  for (Vec x : {vec2(1, 0.3), vec2(-0.2, 2.0), vec2(0.7, -0.7)})
    CHECK(p15.polar(x) == doctest::Approx(grid_polar(p15, x, 20000)).epsilon(1e-6));
  CHECK_THROWS_AS(polar(diag41(), vec2(0, 0)), Error);
}

TEST_CASE("bidual recovers F") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  auto p3 = FinslerNorm::weighted_p_norm(3.0, {1, 2});
  auto p3dual = FinslerNorm::weighted_p_norm(1.5, {1.0, 0.5});
  auto A = diag41();
  auto Ainv = FinslerNorm::quadratic_form(2, {0.25, 0, 0, 1});
  for (int s = 0; s < 100; ++s) {
    Vec x = vec2(nd(rng), nd(rng));
    CHECK(p3dual.F(x) == doctest::Approx(p3.polar(x)).epsilon(1e-12));
    CHECK(p3dual.polar(x) == doctest::Approx(p3.F(x)).epsilon(1e-12));
    CHECK(Ainv.polar(x) == doctest::Approx(A.F(x)).epsilon(1e-12));
    // sup over a direction grid of <x, y>/F°(y) gives F back.
    double best = 0.0;
    for (int k = 0; k < 20000; ++k) {
      Vec u = vec2(std::cos(2 * pi * k / 20000), std::sin(2 * pi * k / 20000));
      best = std::max(best, dot(x, u, 2) / p3.polar(u));
    }
    CHECK(best == doctest::Approx(p3.F(x)).epsilon(1e-6));
  }
}

TEST_CASE("homogeneity and evenness") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ut(-5, 5);
  for (const auto& f : {FinslerNorm::weighted_p_norm(1.5, {1, 2}), diag41(),
                        FinslerNorm::sampled_support({0.1, 1.0, 2.0}, {1.0, 0.8, 1.2})}) {
    for (int s = 0; s < 100; ++s) {
      Vec x = vec2(nd(rng), nd(rng));
      double t = ut(rng);
      CHECK(std::abs(f.F(scaled(x, t)) - std::abs(t) * f.F(x)) <= 1e-12 * f.F(x) * std::abs(t) + 1e-300);
      CHECK(f.F(x) > 0.0);
      CHECK(f.F(x) >= f.a() * norm2(x, 2) * (1 - 1e-12));
      CHECK(f.F(x) <= f.b() * norm2(x, 2) * (1 + 1e-12));
      Vec y = vec2(nd(rng), nd(rng));
      CHECK(f.F(scaled(add(x, y), 0.5)) <= 0.5 * f.F(x) + 0.5 * f.F(y) + 1e-12);
    }
  }
}

TEST_CASE("anisotropy bounds") {
  auto A = diag41();
  CHECK(A.a() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(A.b() == doctest::Approx(2.0).epsilon(1e-12));
  auto l1 = FinslerNorm::weighted_p_norm(1.0, {1, 1});
  CHECK(l1.a() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(l1.b() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  auto e3 = FinslerNorm::euclidean(3);
  CHECK(e3.a() == doctest::Approx(1.0));
  CHECK(e3.b() == doctest::Approx(1.0));
}

TEST_CASE("kappa_n") {
  CHECK(std::abs(kappa_n(FinslerNorm::euclidean(2)) - pi) < 1e-10);
  CHECK(std::abs(kappa_n(FinslerNorm::weighted_p_norm(1.0, {1, 1})) - 4.0) < 1e-8);
  CHECK(std::abs(kappa_n(diag41()) - 2 * pi) < 1e-8);
  // Monte Carlo membership count for diag(4,1): {F° <= 1} = {x^2/4 + y^2 <= 1} inside [-2,2]x[-1,1].
  {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(-2, 2), uy(-1, 1);
    const int N = 1000000;
    int hit = 0;
    auto A = diag41();
    for (int s = 0; s < N; ++s) hit += A.polar(vec2(ux(rng), uy(rng))) <= 1.0;
    CHECK(8.0 * hit / N == doctest::Approx(2 * pi).epsilon(5e-3));
  }
  CHECK(kappa_n(FinslerNorm::euclidean(3)) == doctest::Approx(4 * pi / 3).epsilon(1e-10));
  // l^inf unit ball in 3D for the l^1 gauge: cube of side 2.
  CHECK(kappa_n(FinslerNorm::weighted_p_norm(1.0, {1, 1, 1})) == doctest::Approx(8.0).epsilon(1e-3));
  CHECK_THROWS_AS(kappa_n(FinslerNorm::euclidean(4)), Error);
  // Square support polygon [-1,1]^2 is the l^1 gauge.
  auto sq = FinslerNorm::sampled_support({0, pi / 2}, {1, 1});
  CHECK(kappa_n(sq) == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(sq.F(vec2(1, -2)) == doctest::Approx(3.0));
  CHECK(sq.polar(vec2(0.3, -0.7)) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("kappa scaling by grid count") {
  auto f = FinslerNorm::weighted_p_norm(3.0, {1, 2});
  const double kap = kappa_n(f);
  for (double r : {0.5, 1.0, 2.0}) {
    const int N = 800;
    const double ext = 2.2 * r, h = 2 * ext / N;
    long hit = 0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) hit += f.polar(vec2(-ext + (i + 0.5) * h, -ext + (j + 0.5) * h)) <= r;
    CHECK(hit * h * h == doctest::Approx(kap * r * r).epsilon(5e-3));
  }
}

TEST_CASE("lambda_n") {
  CHECK(std::abs(lambda_n(FinslerNorm::euclidean(2)) - 4 * pi) < 1e-10);
  CHECK(lambda_n(FinslerNorm::weighted_p_norm(1.0, {1, 1})) == doctest::Approx(16.0).epsilon(1e-9));
  CHECK(lambda_n(FinslerNorm::euclidean(3)) ==
        doctest::Approx(std::pow(3.0, 1.5) * std::sqrt(4 * pi / 3)).epsilon(1e-10));
}

TEST_CASE("duality_check") {
  auto e = duality_check(FinslerNorm::euclidean(2), 1000);
  CHECK(e.max_violation() < 1e-10);
  auto q = duality_check(diag41(), 1000);
  CHECK(q.unit_dual < 1e-8);
  auto p3 = duality_check(FinslerNorm::weighted_p_norm(3.0, {1, 1}), 1000);
  CHECK(p3.inversion < 1e-6);
  for (double p : {1.5, 2.0, 3.0})
    CHECK(duality_check(FinslerNorm::weighted_p_norm(p, {1, 1}), 1000).max_violation() < 1e-6);
  auto e3 = duality_check(FinslerNorm::euclidean(3), 500);
  CHECK(e3.max_violation() < 1e-10);
  auto hex = duality_check(FinslerNorm::sampled_support({0, 1.0, 2.1}, {1, 1.1, 0.9}), 300);
  CHECK_FALSE(hex.analytic);
}

TEST_CASE("construction validation") {
  CHECK_THROWS_AS(FinslerNorm::weighted_p_norm(0.5, {1, 1}), Error);
  CHECK_THROWS_AS(FinslerNorm::weighted_p_norm(2.0, {1, -1}), Error);
  CHECK_THROWS_AS(FinslerNorm::quadratic_form(2, {1, 2, 2, 1}), Error);
  CHECK_THROWS_AS(FinslerNorm::sampled_support({0.0}, {1.0}), Error);
  CHECK(FinslerNorm::weighted_p_norm(1.0, {1, 1}).pde_supported() == false);
  CHECK(FinslerNorm::weighted_p_norm(INFINITY, {1, 1}).pde_supported() == false);
  CHECK(FinslerNorm::weighted_p_norm(1.5, {1, 1}).pde_supported());
}

TEST_CASE("fused F_grad agrees with F and grad_F") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  std::vector<FinslerNorm> norms{FinslerNorm::weighted_p_norm(3.0, {1, 2}), FinslerNorm::weighted_p_norm(2.0, {1, 3}),
                                 FinslerNorm::weighted_p_norm(1.7, {2, 1, 0.5}),
                                 FinslerNorm::quadratic_form(2, {2, 0.3, 0.3, 1}), FinslerNorm::euclidean(3)};
  for (const auto& f : norms)
    for (int s = 0; s < 200; ++s) {
      Vec x{};
      for (int i = 0; i < f.dim(); ++i) x[i] = nd(rng);
      if (s % 7 == 0) x[0] = 0.0;
      Vec g;
      CHECK(f.F_grad(x, g) == doctest::Approx(f.F(x)).epsilon(1e-13));
      Vec r = f.grad_F(x);
      for (int i = 0; i < f.dim(); ++i) CHECK(g[i] == doctest::Approx(r[i]).epsilon(1e-12));
    }
}
