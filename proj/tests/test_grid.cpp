#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "anisomt/grid.hpp"

using namespace anisomt;

TEST_CASE("disk mesh puts a node at the center") {
  auto g = GridFunction::on_domain(Domain::disk(1.0), 1.0 / 64);
  const Mesh& m = g.mesh();
  bool found = false;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (norm2(m.point(i), 2) < 1e-12) found = g.mask()[i];
  CHECK(found);
  CHECK(g.mask_measure() == doctest::Approx(std::numbers::pi).epsilon(0.03));
}

TEST_CASE("mask measure converges to domain measure") {
  auto poly = Domain::polygon({vec2(0, 0), vec2(1, 0), vec2(0.5, 0.8)});
  CHECK(poly.measure() == doctest::Approx(0.4));
  double prev = 1.0;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    auto g = GridFunction::on_domain(poly, h);
    double err = std::abs(g.mask_measure() - poly.measure());
    CHECK(err < 4 * h);
    prev = err;
  }
  (void)prev;
  auto sq = GridFunction::on_domain(Domain::square(1.0), 1.0 / 50);
  // strictly interior nodes of the unit square: 49 x 49
  CHECK(sq.mask_measure() == doctest::Approx(49.0 * 49.0 / 2500.0));
  auto w = Domain::wulff(FinslerNorm::weighted_p_norm(1.0, {1, 1}), 1.0);
  CHECK(w.measure() == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("values vanish off the mask") {
  auto g = GridFunction::on_domain(Domain::disk(1.0), 0.1);
  g.fill([](const Vec&) { return 2.0; });
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!g.mask()[i]) CHECK(g[i] == 0.0);
  CHECK(g.integral() == doctest::Approx(2.0 * g.mask_measure()));
  CHECK(g.lp_norm(2.0) == doctest::Approx(std::sqrt(4.0 * g.mask_measure())));
}

TEST_CASE("interpolation reproduces affine functions") {
  auto g = GridFunction::on_domain(Domain::square(2.0), 0.1);
  g.fill([](const Vec& x) { return 1.0 + 2.0 * x[0] - 3.0 * x[1]; });
  for (Vec x : {vec2(0.13, -0.27), vec2(-0.55, 0.41), vec2(0.0, 0.0)})
    CHECK(g.interpolate(x) == doctest::Approx(1.0 + 2.0 * x[0] - 3.0 * x[1]).epsilon(1e-12));
  CHECK(g.interpolate(vec2(50, 50)) == 0.0);
}

TEST_CASE("CSV and binary round trips") {
  auto g = GridFunction::on_domain(Domain::disk(1.0), 0.25);
  g.fill([](const Vec& x) { return 1.0 / 3.0 + x[0] * x[0]; });
  std::stringstream cs;
  g.write_csv(cs);
  auto c = GridFunction::read_csv(cs);
  CHECK(c.mesh() == g.mesh());
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(c[i] == g[i]);

  std::stringstream bs;
  g.write_binary(bs);
  CHECK(bs.str().substr(0, 4) == "GFN1");
  auto b = GridFunction::read_binary(bs);
  CHECK(b.mesh() == g.mesh());
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(b[i] == g[i]);
    CHECK(b.mask()[i] == g.mask()[i]);
  }
  std::stringstream bad("XXXX");
  CHECK_THROWS_AS(GridFunction::read_binary(bad), Error);
}

TEST_CASE("3D grid") {
  auto g = GridFunction::on_domain(Domain::disk(1.0, 3), 0.1);
  CHECK(g.mesh().dim == 3);
  CHECK(g.mask_measure() == doctest::Approx(4.0 / 3.0 * std::numbers::pi).epsilon(0.05));
}
