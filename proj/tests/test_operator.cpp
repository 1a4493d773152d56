// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "operator.hpp"

using namespace lapkit;

namespace
{

Grid small_grid(double h, double rmax, double sponge = 0)
{
  GridConfig gc;
  gc.h = h;
  gc.rmax = rmax;
  gc.sponge_width = sponge;
  return build_grid(gc);
}

OperatorOptions dirichlet()
{
  OperatorOptions o;
  o.truncation = Truncation::Dirichlet;
  o.closure = OuterClosure::Dirichlet;
  return o;
}

std::vector<cplx> random_vec(std::size_t n, std::mt19937_64 &rng)
{
  std::normal_distribution<double> d;
  std::vector<cplx> u(n);
  for (auto &z : u)
    z = {d(rng), d(rng)};
  return u;
}

cplx inner(const std::vector<cplx> &x, const std::vector<cplx> &y)
{
  cplx s = 0;
  for (std::size_t i = 0; i < x.size(); i++)
    s += std::conj(x[i]) * y[i];
  return s;
}

}  // namespace

TEST_CASE("seven point Laplacian")
{
  const Grid g = small_grid(0.5, 4);
  CoefficientSet flat;
  const auto op = assemble(flat, g, 0, 0, dirichlet());
  CHECK(op.hermitian);
  const double h2 = 0.25;
  for (std::size_t u = 0; u < op.size(); u++)
  {
    int off = 0;
    for (auto p = op.A.rowptr[u]; p < op.A.rowptr[u + 1]; p++)
    {
      if (std::size_t(op.A.col[p]) == u)
        CHECK(op.A.val[p] == cplx(-6 / h2));
      else
      {
        CHECK(op.A.val[p] == cplx(1 / h2));
        off++;
      }
    }
    CHECK(off <= 6);
  }
  // v = 0 maps to 0
  const Field z = lapkit::apply(op, g.zeros());
  for (const cplx &x : z)
    CHECK(x == cplx(0));
}

TEST_CASE("linearity and Hermitian symmetry")
{
  const Grid g = small_grid(0.5, 4);
  CoefficientSet cs;
  cs.metric = parse_metric("metric_radial(0.3,0.2)");
  cs.magnetic = parse_magnetic("aharonov_bohm(0.7)");
  cs.electric = parse_electric("coulomb(1,1)");
  std::mt19937_64 rng(17);
  const auto op = assemble(cs, g, 0.8, 0, dirichlet());
  REQUIRE(op.hermitian);
  CHECK(op.A.hermitian_defect() < 1e-12);

  const auto u = random_vec(op.size(), rng), v = random_vec(op.size(), rng);
  const auto Lu = apply_unknowns(op, u), Lv = apply_unknowns(op, v);
  const cplx l = inner(Lu, v), r = inner(u, Lv);
  CHECK(std::abs(l - r) <= 1e-12 * std::abs(l));

  const cplx al(0.3, -1.2), be(2.1, 0.4);
  std::vector<cplx> w(u.size());
  for (std::size_t i = 0; i < w.size(); i++)
    w[i] = al * u[i] + be * v[i];
  const auto Lw = apply_unknowns(op, w);
  double worst = 0, scale = 0;
  for (std::size_t i = 0; i < w.size(); i++)
  {
    worst = std::max(worst, std::abs(Lw[i] - al * Lu[i] - be * Lv[i]));
    scale = std::max(scale, std::abs(Lw[i]));
  }
  CHECK(worst <= 1e-13 * scale);

  // eps enters as i eps on the diagonal: A - A^* = 2 i eps
  const auto ope = assemble(cs, g, 0.8, 0.3, dirichlet());
  CHECK_FALSE(ope.hermitian);
  for (std::size_t i = 0; i < ope.size(); i += 31)
    CHECK(std::abs(ope.A.diag(i) - op.A.diag(i) - cplx(0, 0.3)) < 1e-14);
}

TEST_CASE("discrete gauge covariance")
{
  // b = (beta, 0, 0) = grad(beta x1); with D = grad + i b the conjugated field
  // e^{-i beta x1} u sees the b = 0 operator, up to O(h^2).
  const double beta = 0.8;
  auto defect = [&](double h) {
    const Grid g = small_grid(h, 3);
    CoefficientSet flat, mag;
    mag.magnetic = {make_affine_magnetic({beta, 0, 0}, Mat3{})};
    const auto op0 = assemble(flat, g, 1, 0, dirichlet());
    const auto opb = assemble(mag, g, 1, 0, dirichlet());
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    Field u = g.zeros(), w = g.zeros();
    for (std::size_t i = 0; i < g.num_nodes(); i++)
      if (g.is_unknown(i))
      {
        u[i] = {d(rng), d(rng)};
        w[i] = std::exp(cplx(0, -beta * g.x(i)[0])) * u[i];
      }
    const Field L0 = lapkit::apply(op0, u), Lb = lapkit::apply(opb, w);
    double worst = 0, scale = 0;
    for (std::size_t i = 0; i < g.num_nodes(); i++)
    {
      worst = std::max(worst, std::abs(Lb[i] - std::exp(cplx(0, -beta * g.x(i)[0])) * L0[i]));
      scale = std::max(scale, std::abs(L0[i]));
    }
    return worst / scale;
  };
  const double d1 = defect(0.25), d2 = defect(0.125);
  CHECK(d1 < 0.05);
  CHECK(d1 / d2 > 3.4);
}

TEST_CASE("manufactured Gaussian is second order")
{
  // (Delta + 1/r + 1 + 0.1 i) e^{-r^2} = (4 r^2 - 6 + 1/r + 1 + 0.1 i) e^{-r^2}
  auto err = [](double h) {
    const Grid g = small_grid(h, 5);
    CoefficientSet cs;
    cs.electric = parse_electric("coulomb(1,1)");
    const auto op = assemble(cs, g, 1, 0.1, dirichlet());
    Field v = g.zeros();
    for (std::size_t i = 0; i < g.num_nodes(); i++)
      if (g.is_unknown(i))
        v[i] = std::exp(-dot(g.x(i), g.x(i)));
    const Field Lv = lapkit::apply(op, v);
    double worst = 0;
    for (std::size_t i = 0; i < g.num_nodes(); i++)
    {
      if (g.cls[i] != NodeClass::Interior)
        continue;
      const double r = norm(g.x(i));
      const cplx exact = (4 * r * r - 6 + cs.c(g.x(i)) + cplx(1, 0.1)) * std::exp(-r * r);
      worst = std::max(worst, std::abs(Lv[i] - exact));
    }
    return worst;
  };
  const double e1 = err(0.25), e2 = err(0.125);
  CHECK(e1 < 0.2);
  CHECK(std::log2(e1 / e2) > 1.8);
}

TEST_CASE("sponge profile")
{
  const Grid g = small_grid(0.25, 4, 1.5);
  OperatorOptions o;
  o.truncation = Truncation::Sponge;
  double sigma = 0;
  const RealField W = sponge_profile(g, 4, o, &sigma);
  CHECK(sigma == doctest::Approx(4));
  // inner edge ||x||_inf = 2.5 and the outer face ||x||_inf = 4
  CHECK(W[g.index(g.M + 10, g.M, g.M)] == 0);
  CHECK(W[g.index(2 * g.M, g.M, g.M)] == doctest::Approx(sigma));
  CHECK(W[g.index(g.M, g.M, g.M)] == 0);

  o.truncation = Truncation::Robin;
  const RealField none = sponge_profile(g, 4, o);
  for (double x : none)
    CHECK(x == 0);

  OperatorOptions thin;
  thin.truncation = Truncation::Sponge;
  const Grid gt = small_grid(0.5, 4, 1.5);
  CHECK_THROWS_AS(sponge_profile(gt, 1, thin), Error);
}

TEST_CASE("Robin closure")
{
  const Grid g = small_grid(0.5, 4, 0);
  CoefficientSet flat;
  const auto op = assemble(flat, g, 1, 0.2);
  CHECK(op.robin);
  CHECK_FALSE(op.hermitian);
  // only rows touching the faces carry a truncation term, with absorbing imaginary part
  std::size_t touched = 0;
  for (std::size_t u = 0; u < op.size(); u++)
    if (op.truncation_diag[u] != cplx(0))
    {
      touched++;
      CHECK(op.truncation_diag[u].imag() > 0);
    }
  CHECK(touched == 15u * 15 * 15 - 13u * 13 * 13);
  CHECK_THROWS_AS(parse_truncation("pml"), Error);
}
