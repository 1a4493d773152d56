// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "assumptions.hpp"
#include "coefficients.hpp"

using namespace lapkit;

namespace
{

CoefficientSet with_metric(const std::string &m)
{
  CoefficientSet cs;
  cs.metric = parse_metric(m);
  return cs;
}

Vec3 random_point(std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> u(-3, 3);
  Vec3 x;
  do
    x = {u(rng), u(rng), u(rng)};
  while (norm(x) < 0.5 || std::hypot(x[0], x[1]) < 0.3);
  return x;
}

}  // namespace

TEST_CASE("derived metric scalars")
{
  CoefficientSet flat;
  auto d = derived_metric_scalars(flat, {0.3, -1, 2});
  CHECK(d.ahat == doctest::Approx(1));
  CHECK(d.abar == doctest::Approx(3));
  CHECK(d.atil == doctest::Approx(0));

  CoefficientSet diag;
  diag.metric = make_metric_constant({{{2, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
  d = derived_metric_scalars(diag, {1, 0, 0});
  CHECK(d.ahat == doctest::Approx(2));
  CHECK(d.abar == doctest::Approx(4));
  CHECK(d.atil == doctest::Approx(0).epsilon(1e-14));

  // a = I + k (1+r)^-1 xhat xhat^T at x = (1,0,0): ahat = 1 + k/2, abar = 3 + k/2,
  // atil = d_l a_lm xhat_m = rho'(r) + 2 rho / r = -1/4 k + k = 3k/4 (sympy).
  auto lr = with_metric("metric_longrange(0.1,1)");
  d = derived_metric_scalars(lr, {1, 0, 0});
  CHECK(d.ahat == doctest::Approx(1.05).epsilon(1e-13));
  CHECK(d.abar == doctest::Approx(3.05).epsilon(1e-13));
  CHECK(d.atil == doctest::Approx(0.075).epsilon(1e-12));
  CHECK_THROWS(derived_metric_scalars(lr, {0, 0, 0}));
}

TEST_CASE("radial A psi")
{
  CoefficientSet flat;
  CHECK(radial_A_psi(flat, {0.4, 1, -2}, norm(Vec3{0.4, 1, -2}), 1) == doctest::Approx(3));
  CHECK(radial_A_psi(flat, {2, 0, 0}, 1, 0) == doctest::Approx(1));

  // perturbed metric, psi = |x|: finite-difference divergence of a xhat
  auto cs = with_metric("metric_radial(0.3,0.2)");
  const Vec3 x = (2 / std::sqrt(3.0)) * Vec3{1, 1, 1};
  const double e = 1e-4;
  double div = 0;
  for (int l = 0; l < 3; l++)
  {
    Vec3 xp = x, xm = x;
    xp[l] += e;
    xm[l] -= e;
    const Vec3 fp = matvec(cs.a(xp), (1 / norm(xp)) * xp);
    const Vec3 fm = matvec(cs.a(xm), (1 / norm(xm)) * xm);
    div += (fp[l] - fm[l]) / (2 * e);
  }
  CHECK(radial_A_psi(cs, x, 1, 0) == doctest::Approx(div).epsilon(1e-6));
}

TEST_CASE("library values")
{
  CoefficientSet cs;
  cs.electric = parse_electric("coulomb(1,1)");
  CHECK(cs.c({1, 2, 2}) == doctest::Approx(1.0 / 3));
  cs.electric = parse_electric("inverse_square(2)");
  CHECK(cs.c({0, 3, 4}) == doctest::Approx(2.0 / 25));
  cs.electric = parse_electric("gaussian_well(-5,1)");
  CHECK(cs.c({0, 0, 0}) == doctest::Approx(5));  // attractive: L + lambda = Delta + 5 e^{-r^2} + lambda
  cs.electric = parse_electric("coulomb(1,1)+inverse_square(0.5)");
  CHECK(cs.c({0, 0, 2}) == doctest::Approx(0.5 + 0.125));
  CHECK_THROWS_AS(parse_electric("yukawa(1)"), Error);
  CHECK_THROWS_AS(parse_electric("coulomb(1)"), Error);

  cs.magnetic = parse_magnetic("aharonov_bohm(1)");
  const Vec3 b = cs.b({1, 2, 0.5});
  CHECK(b[0] == doctest::Approx(-2.0 / 5));
  CHECK(b[1] == doctest::Approx(1.0 / 5));
  CHECK(b[2] == doctest::Approx(0));
}

TEST_CASE("analytic derivatives against central differences")
{
  CoefficientSet cs;
  cs.metric = parse_metric("metric_radial(0.4,0.25)");
  cs.magnetic = parse_magnetic("aharonov_bohm(0.7)+ab_sphere(0.3)");
  cs.electric = parse_electric("coulomb(1,1)+gaussian_well(2,1.5)");
  auto defect = [&](double e) {
    double worst = 0;
    std::mt19937_64 r2(11);
    for (int t = 0; t < 100; t++)
    {
      const Vec3 x = random_point(r2);
      const MetricSample ms = cs.metric_at(x, 1);
      const Mat3 J = cs.db(x);
      const Vec3 gc = cs.grad_c(x);
      for (int k = 0; k < 3; k++)
      {
        Vec3 xp = x, xm = x;
        xp[k] += e;
        xm[k] -= e;
        const Mat3 ap = cs.a(xp), am = cs.a(xm);
        const Vec3 bp = cs.b(xp), bm = cs.b(xm);
        for (int i = 0; i < 3; i++)
        {
          for (int j = 0; j < 3; j++)
            worst = std::max(worst, std::abs((ap[i][j] - am[i][j]) / (2 * e) - ms.d1[k][i][j]));
          worst = std::max(worst, std::abs((bp[i] - bm[i]) / (2 * e) - J[i][k]));
        }
        worst = std::max(worst, std::abs((cs.c(xp) - cs.c(xm)) / (2 * e) - gc[k]));
      }
    }
    return worst;
  };
  const double d1 = defect(1e-2), d2 = defect(5e-3);
  CHECK(d1 < 5e-3);
  CHECK(std::log2(d1 / d2) > 1.8);
}

TEST_CASE("splittings reassemble")
{
  CoefficientSet cs;
  cs.magnetic = parse_magnetic("aharonov_bohm(1)+ab_sphere(0.5)");
  cs.electric = parse_electric("coulomb(1,1)+inverse_square(0.3)");
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; t++)
  {
    const Vec3 x = random_point(rng);
    CHECK(std::abs(cs.c_short(x) + cs.c_long(x) - cs.c(x)) <= 1e-14 * (1 + std::abs(cs.c(x))));
    const Vec3 d = cs.b_short(x) + cs.b_long(x) - cs.b(x);
    CHECK(norm(d) <= 1e-14 * (1 + norm(cs.b(x))));
  }
}

TEST_CASE("tangential field")
{
  CoefficientSet cs;
  CHECK(norm(tangential_field(cs, {1, 2, 3})) == 0);
  cs.magnetic = parse_magnetic("aharonov_bohm(1)");
  CHECK(norm(tangential_field(cs, {1, 2, 0.5})) < 1e-14);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; t++)
    CHECK(norm(tangential_field(cs, random_point(rng))) < 1e-12);

  // b = (0, x1, 0): components (d_j b_l - d_l b_j) xhat_l at x = (1,0,0).
  // Only d_1 b_2 = 1 is nonzero, so the j = 2 component is -(d_1 b_2) xhat_1 = -1.
  CoefficientSet affine;
  affine.magnetic = {make_affine_magnetic({0, 0, 0}, {{{0, 0, 0}, {1, 0, 0}, {0, 0, 0}}})};
  const Vec3 t = tangential_field(affine, {1, 0, 0});
  CHECK(t[0] == doctest::Approx(0));
  CHECK(t[1] == doctest::Approx(-1));
  CHECK(t[2] == doctest::Approx(0));
}

TEST_CASE("ellipticity bounds")
{
  CoefficientSet flat;
  CHECK(flat.nu() == doctest::Approx(1));
  CHECK(flat.N() == doctest::Approx(1));
  auto cs = with_metric("metric_radial(0.5,-0.2)");
  CHECK(cs.nu() > 0);
  CHECK(cs.nu() <= 1);
  CHECK(cs.N() >= 1);
}

TEST_CASE("assumption report")
{
  GridConfig gc;
  gc.h = 0.5;
  const Grid g = build_grid(gc);

  CoefficientSet flat;
  auto r = assumption_report(flat, g);
  for (const Functional *f : r.entries())
    CHECK(f->value == 0);
  CHECK_FALSE(r.any_unbounded());

  CoefficientSet isq;
  isq.electric = parse_electric("inverse_square(1)");
  r = assumption_report(isq, g);
  CHECK(r.kappa_c.value == doctest::Approx(1).epsilon(1e-9));
  CHECK(r.gamma1.value == doctest::Approx(0).epsilon(1e-12));  // [d_r(r c)]_+ = 0

  CoefficientSet coul;
  coul.electric = parse_electric("coulomb(1,1)");
  r = assumption_report(coul, g);
  CHECK(std::isfinite(r.K_c.value));
  CHECK_FALSE(r.K_c.unbounded);
  CHECK_FALSE(r.any_unbounded());

  // monotone in the sample set: more directions never lowers a sup
  AssumptionOptions more;
  more.directions = 300;
  auto r2 = assumption_report(coul, g, more);
  CHECK(r2.kappa_c.value >= r.kappa_c.value - 1e-15);

  CoefficientSet lr = with_metric("metric_longrange(0.1,0.5)");
  r = assumption_report(lr, g);
  CHECK(r.kappa_dyadic.unbounded);

  CoefficientSet abs_;
  abs_.magnetic = parse_magnetic("ab_sphere(1)");
  r = assumption_report(abs_, g);
  CHECK_FALSE(r.any_unbounded());
}
