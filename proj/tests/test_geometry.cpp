// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "geometry.hpp"

using namespace lapkit;

TEST_CASE("grid counting and shells")
{
  GridConfig gc;
  gc.h = 0.25;
  gc.rmax = 8;
  const Grid g = build_grid(gc);
  CHECK(g.n == 65);
  CHECK(g.num_nodes() == 65u * 65u * 65u);
  CHECK(g.populated_lo == -2);
  CHECK(g.populated_hi == 2);
  // norms use shells with 2^j >= 2h that end before the sponge
  CHECK(g.shell_lo == -1);
  CHECK(g.shell_hi == 2);
  // every interior node lies in its dyadic shell
  for (std::size_t i = 0; i < g.num_nodes(); i += 97)
  {
    if (g.cls[i] != NodeClass::Interior)
      continue;
    const double r = norm(g.x(i));
    const int j = shell_of(r);
    CHECK(std::ldexp(1.0, j) <= r);
    CHECK(r < std::ldexp(1.0, j + 1));
  }
  CHECK(shell_of(1.0) == 0);
  CHECK(shell_of(std::nextafter(1.0, 0.0)) == -1);
  CHECK(shell_of(2.0) == 1);
  CHECK(shell_of(0.3) == -2);
}

TEST_CASE("ball obstacle")
{
  GridConfig gc;
  gc.h = 0.25;
  gc.obstacle = parse_obstacle("ball:1");
  const Grid g = build_grid(gc);
  std::size_t dirichlet = 0;
  for (std::size_t i = 0; i < g.num_nodes(); i++)
  {
    if (g.cls[i] == NodeClass::Obstacle)
    {
      dirichlet++;
      CHECK(norm(g.x(i)) <= 1 + 1e-12);
    }
    if (g.in_domain(i))
      CHECK(norm(g.x(i)) > 1);
  }
  CHECK(dirichlet > 0);
}

TEST_CASE("grid guards")
{
  GridConfig gc;
  gc.h = 0.5;
  gc.rmax = 1;
  gc.sponge_width = 0;
  CHECK_THROWS_WITH_AS(build_grid(gc), doctest::Contains("fewer than 3 shells"), Error);
  GridConfig bad;
  bad.obstacle = parse_obstacle("ball:5.6");
  CHECK_THROWS_AS(build_grid(bad), Error);
  CHECK_THROWS_AS(parse_obstacle("cube:1"), Error);
}

TEST_CASE("starshaped check")
{
  CoefficientSet flat;
  auto r = starshaped_check(flat, parse_obstacle("ball:1"));
  CHECK(r.ok);
  CHECK(r.worst_value == doctest::Approx(-1).epsilon(1e-12));
  CHECK(starshaped_check(flat, parse_obstacle("ellipsoid:1,1,0.5")).ok);
  r = starshaped_check(flat, parse_obstacle("ball:1@2,0,0"));
  CHECK_FALSE(r.ok);
  REQUIRE(r.worst_point.has_value());
  CHECK(r.worst_value > 0);
  CHECK(starshaped_check(flat, Obstacle{}).ok);
}

TEST_CASE("sphere quadrature")
{
  auto sq = SphereQuadrature::build(nullptr, 2, 16);
  CHECK(sq.integrate([](const Vec3 &) { return 1.0; }) == doctest::Approx(16 * M_PI).epsilon(1e-12));
  for (double w : sq.weights)
    CHECK(w > 0);
  auto s1 = SphereQuadrature::build(nullptr, 1, 16);
  CHECK(std::abs(s1.integrate([](const Vec3 &x) { return x[2]; })) < 1e-12);
  CHECK(s1.integrate([](const Vec3 &x) { return x[2] * x[2]; }) ==
        doctest::Approx(4 * M_PI / 3).epsilon(1e-12));
  // a degree-6 harmonic product is integrated exactly at degree 16
  CHECK(std::abs(s1.integrate([](const Vec3 &x) { return x[0] * x[0] * x[1] * x[1] * x[2] * x[2]; }) -
                 4 * M_PI / 105) < 1e-12);

  GridConfig gc;
  gc.h = 0.25;
  gc.obstacle = parse_obstacle("ball:1@1.5,0,0");
  const Grid g = build_grid(gc);
  auto clipped = SphereQuadrature::build(&g, 1, 16);
  CHECK(clipped.clipped);
  CHECK(clipped.area() < 4 * M_PI);
  CHECK_THROWS_AS(SphereQuadrature::build(&g, 6, 8), Error);
}

TEST_CASE("trilinear interpolation")
{
  GridConfig gc;
  gc.h = 0.25;
  const Grid g = build_grid(gc);
  Field f = g.zeros();
  for (std::size_t i = 0; i < g.num_nodes(); i++)
  {
    const Vec3 x = g.x(i);
    f[i] = cplx(1 + 2 * x[0] - x[1] + 0.5 * x[2], x[0] * x[1]);
  }
  const Vec3 p{0.31, -1.07, 2.2};
  const cplx v = interpolate(g, f, p);
  CHECK(v.real() == doctest::Approx(1 + 2 * 0.31 + 1.07 + 1.1).epsilon(1e-13));
  CHECK(v.imag() == doctest::Approx(0.31 * -1.07).epsilon(1e-13));  // bilinear terms are exact
}
