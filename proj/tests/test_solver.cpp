// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "lap_lab.hpp"
#include "solver.hpp"

using namespace lapkit;

namespace
{

Grid grid_h(double h, double rmax = 6)
{
  GridConfig gc;
  gc.h = h;
  gc.rmax = rmax;
  gc.sponge_width = 0;
  return build_grid(gc);
}

double max_abs(const Field &v)
{
  double m = 0;
  for (const cplx &z : v)
    m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

TEST_CASE("zero right-hand side")
{
  const Grid g = grid_h(0.5);
  CoefficientSet flat;
  const auto op = assemble(flat, g, 1, 0.1);
  const auto r = solve(op, g.zeros(), {});
  CHECK(r.ok());
  CHECK(r.iterations == 0);
  CHECK(max_abs(r.v) == 0);
}

TEST_CASE("diagonally dominant system converges fast")
{
  // Delta + 100 + i at h = 0.5: diagonal 76 + i against six 4's.
  const Grid g = grid_h(0.5);
  CoefficientSet flat;
  const auto op = assemble(flat, g, 100, 1);
  const Field f = sample_source(g, parse_source("gaussian(1,1)"));
  for (Method m : {Method::Gmres, Method::Bicgstab})
  {
    SolveOptions o;
    o.method = m;
    o.tol = 1e-10;
    const auto r = solve(op, f, o);
    CHECK(r.ok());
    CHECK(r.iterations < 50);
    CHECK(r.rel_residual <= 1e-10 * 1.1);
  }
}

TEST_CASE("methods agree and the residual certificate holds")
{
  const Grid g = grid_h(0.5);
  CoefficientSet cs;
  cs.electric = parse_electric("coulomb(1,1)");
  cs.magnetic = parse_magnetic("aharonov_bohm(0.5)");
  const auto op = assemble(cs, g, 1, 0.2);
  const Field f = sample_source(g, parse_source("gaussian(1,1,0.5,0,0)"));
  SolveOptions lu;
  lu.method = Method::Lu;
  const auto ref = solve(op, f, lu);
  REQUIRE(ref.ok());
  CHECK(ref.rel_residual < 1e-12);
  for (Method m : {Method::Gmres, Method::Bicgstab})
    for (Precond pc : {Precond::None, Precond::Jacobi, Precond::Ilu0})
    {
      SolveOptions o;
      o.method = m;
      o.precond = pc;
      o.tol = 1e-10;
      const auto r = solve(op, f, o);
      CAPTURE(to_string(m));
      CAPTURE(to_string(pc));
      REQUIRE(r.ok());
      CHECK(r.rel_residual <= 1e-10 * 1.1);
      // the iteration's own estimate is within 10% of the recomputed residual
      CHECK(std::abs(r.est_residual - r.rel_residual) <= 0.1 * r.rel_residual + 1e-15);
      double d = 0;
      for (std::size_t i = 0; i < f.size(); i++)
        d = std::max(d, std::abs(r.v[i] - ref.v[i]));
      CHECK(d <= 1e-7 * max_abs(ref.v));
    }
}

TEST_CASE("opposite eps gives the conjugate solution")
{
  const Grid g = grid_h(0.5);
  CoefficientSet cs;
  cs.electric = parse_electric("coulomb(1,1)");
  const Field f = sample_source(g, parse_source("gaussian(1,1)"));
  SolveOptions o;
  o.tol = 1e-12;
  const auto rp = solve(assemble(cs, g, 1, 0.1), f, o);
  const auto rm = solve(assemble(cs, g, 1, -0.1), f, o);
  REQUIRE(rp.ok());
  REQUIRE(rm.ok());
  double d = 0;
  for (std::size_t i = 0; i < f.size(); i++)
    d = std::max(d, std::abs(rm.v[i] - std::conj(rp.v[i])));
  CHECK(d <= 1e-9 * max_abs(rp.v));
}

TEST_CASE("iteration cap reports failure with the best iterate")
{
  const Grid g = grid_h(0.5);
  CoefficientSet flat;
  const auto op = assemble(flat, g, 1, 0.01);
  const Field f = sample_source(g, parse_source("gaussian(1,1)"));
  SolveOptions o;
  o.maxit = 3;
  o.restart = 3;
  o.precond = Precond::None;
  const auto r = solve(op, f, o);
  CHECK_FALSE(r.ok());
  CHECK(r.status == SolveStatus::MaxIterations);
  CHECK(r.rel_residual < 1);
  CHECK(std::isfinite(r.rel_residual));
}

TEST_CASE("deterministic reductions")
{
  std::vector<cplx> x(10007), y(10007);
  for (std::size_t i = 0; i < x.size(); i++)
  {
    x[i] = {std::sin(0.1 * i), std::cos(0.3 * i)};
    y[i] = {1.0 / (1 + i), 0.5};
  }
  const cplx a = dotc(x, y), b = dotc(x, y);
  CHECK(a == b);
  CHECK(norm2(x) == doctest::Approx(std::sqrt(std::real(dotc(x, x)))).epsilon(1e-14));
}
