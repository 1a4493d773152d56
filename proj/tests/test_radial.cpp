// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <numbers>

#include "geometry.hpp"
#include "radial.hpp"

using namespace lapkit;

namespace
{

constexpr double pi = std::numbers::pi;

// Unit-mass Gaussian of width w.
auto bump(double w)
{
  return [w](double r) { return cplx(std::exp(-r * r / (w * w)) / (std::pow(pi, 1.5) * w * w * w)); };
}

}  // namespace

TEST_CASE("outgoing Green function of Delta + 1")
{
  // (Delta + 1) v = delta has v = -e^{ir} / (4 pi r); |v(2)| = 1/(8 pi).
  RadialProblem p;
  p.lambda = 1;
  p.eps = 0;
  p.r_far = 40;
  p.mesh_points = 8000;
  double prev = 1;
  for (double w : {0.4, 0.2, 0.1})
  {
    const auto sol = reduce_and_solve_radial(p, bump(w));
    const cplx v = sol.eval_radial(2);
    const double rel = std::abs(std::abs(v) * 8 * pi - 1);
    CHECK(rel < prev);
    prev = rel;
    // outgoing: the phase advances like e^{+ir}
    const cplx v3 = sol.eval_radial(3);
    CHECK(std::arg(v3 / v) == doctest::Approx(1).epsilon(0.02));
  }
  CHECK(prev < 0.01);
  const auto sol = reduce_and_solve_radial(p, bump(0.1));
  const cplx v = sol.eval_radial(2);
  const cplx exact = -std::exp(cplx(0, 2)) / (8 * pi);
  CHECK(std::abs(v - exact) < 0.01 * std::abs(exact));
}

TEST_CASE("mesh self-convergence")
{
  RadialProblem p;
  p.lambda = 1;
  p.eps = 0.1;
  p.r_far = 24;
  p.coeffs.c = [](double r) { return -2 / ((1 + r * r) * (1 + r * r)); };
  auto at = [&](int n) {
    p.mesh_points = n;
    return reduce_and_solve_radial(p, bump(1)).eval_radial(1.5);
  };
  const cplx a = at(500), b = at(1000), c = at(2000);
  const double ratio = std::abs(a - b) / std::abs(b - c);
  CHECK(ratio > 6);
}

TEST_CASE("zero data gives zero")
{
  RadialProblem p;
  p.r_obs = 1;
  p.lambda = 1;
  p.eps = 0.1;
  const auto sol = reduce_and_solve_radial(p, [](double) { return cplx(0); });
  for (double r : {1.0, 1.5, 3.0, 10.0})
    CHECK(sol.eval_radial(r) == cplx(0));
}

TEST_CASE("real spherical harmonics are orthonormal")
{
  auto sq = SphereQuadrature::build(nullptr, 1, 20);
  double worst = 0;
  for (int l = 0; l <= 4; l++)
    for (int m = -l; m <= l; m++)
      for (int l2 = 0; l2 <= 4; l2++)
        for (int m2 = -l2; m2 <= l2; m2++)
        {
          const double s = sq.integrate(
              [&](const Vec3 &x) { return real_sph_harm(l, m, x) * real_sph_harm(l2, m2, x); });
          worst = std::max(worst, std::abs(s - (l == l2 && m == m2 ? 1.0 : 0.0)));
        }
  CHECK(worst < 1e-12);
}

TEST_CASE("harmonic projection of an off-centre source")
{
  // A radial source projected on lmax = 2 equals the direct radial solve.
  RadialProblem p;
  p.lambda = 1;
  p.eps = 0.2;
  p.lmax = 2;
  p.r_far = 24;
  p.mesh_points = 3000;
  const auto direct = reduce_and_solve_radial(p, bump(1));
  const auto proj = reduce_and_solve(p, [](const Vec3 &x) { return bump(1)(norm(x)); });
  for (const Vec3 &x : {Vec3{1, 0, 0}, Vec3{0.3, -1.2, 0.8}, Vec3{0, 0, 2.5}})
  {
    const cplx a = direct.eval_radial(norm(x)), b = proj.eval(x);
    CHECK(std::abs(a - b) < 1e-6 * std::abs(a));
  }
  CHECK(proj.tail < 1e-12);
}

TEST_CASE("Fornberg weights")
{
  std::vector<std::vector<double>> w;
  fd_weights(0, {-1, 0, 1}, 2, w);
  // w[node][derivative order]
  CHECK(w[0][1] == doctest::Approx(-0.5));
  CHECK(w[2][1] == doctest::Approx(0.5));
  CHECK(w[0][2] == doctest::Approx(1));
  CHECK(w[1][2] == doctest::Approx(-2));
  CHECK(w[1][0] == doctest::Approx(1));
}
