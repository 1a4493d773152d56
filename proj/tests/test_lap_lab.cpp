// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "lap_lab.hpp"

using namespace lapkit;

namespace
{

Grid make_grid(double h, double rmax, double sponge = 0)
{
  GridConfig gc;
  gc.h = h;
  gc.rmax = rmax;
  gc.sponge_width = sponge;
  return build_grid(gc);
}

Problem small_problem(const std::string &electric = "none")
{
  Problem p;
  p.grid.h = 0.5;
  p.grid.rmax = 8;
  p.grid.sponge_width = 2;
  p.coeffs.electric = parse_electric(electric);
  return p;
}

}  // namespace

TEST_CASE("source parsing")
{
  const Source s = parse_source("gaussian(2,0.5,1,0,0)");
  CHECK(s(Vec3{1, 0, 0}) == cplx(2));
  CHECK(std::abs(s(Vec3{1.5, 0, 0}) - 2 * std::exp(-1.0)) < 1e-15);
  CHECK(parse_source("none").zero);
  CHECK_THROWS_AS(parse_source("gaussian(1)"), Error);
  CHECK_THROWS_AS(parse_source("delta(1,1)"), Error);
}

TEST_CASE("radiation verdicts on analytic fields")
{
  const Grid g = make_grid(0.125, 6);
  CoefficientSet flat;
  const auto out = radiation_report(green_field(g, 1, true), flat, g, 1, 0, 0.5);
  CHECK(out.fitted);
  CHECK(out.radiating);
  CHECK(out.verdict == "RADIATING");
  CHECK(out.exponent == doctest::Approx(-2).epsilon(0.1));

  const auto in = radiation_report(green_field(g, 1, false), flat, g, 1, 0, 0.5);
  CHECK_FALSE(in.radiating);
  CHECK(in.exponent > -0.5);

  // standing wave sin(r)/r
  Field s = g.zeros();
  for (std::size_t i = 0; i < g.num_nodes(); i++)
    if (g.is_unknown(i))
    {
      const double r = norm(g.x(i));
      s[i] = r > 0 ? std::sin(r) / r : 1.0;
    }
  const auto st = radiation_report(s, flat, g, 1, 0, 0.5);
  CHECK_FALSE(st.radiating);
  CHECK(st.verdict == "NOT-RADIATING");

  const auto z = radiation_report(g.zeros(), flat, g, 1, 0, 0.5);
  CHECK(z.radiating);

  // too few radii for a fit
  Thresholds th;
  th.fit_rmin = 3;
  const auto nf = radiation_report(green_field(make_grid(0.25, 4), 1, true), flat,
                                   make_grid(0.25, 4), 1, 0, 0.5, th);
  CHECK(nf.verdict == "NO-FIT");
  CHECK_FALSE(nf.fitted);
}

TEST_CASE("flat sweep passes all three verdicts")
{
  const Problem p = small_problem();
  const auto res = lap_sweep(p, 1, {0.4, 0.2, 0.1, 0.05});
  REQUIRE(res.rows.size() == 4);
  CHECK_FALSE(res.partial);
  CHECK(res.uniform);
  CHECK(res.cauchy);
  CHECK(res.outgoing);
  CHECK(std::isnan(res.rows[0].cauchy));
  for (std::size_t k = 1; k < res.rows.size(); k++)
    CHECK(res.rows[k].cauchy < res.rows[k - 1].h1_norm);
  CHECK(res.q_ratio >= 1);
}

TEST_CASE("negative eps selects the conjugate branch")
{
  const Problem p = small_problem("coulomb(1,1)");
  const auto plus = lap_sweep(p, 1, {0.2, 0.1}, -1, 0.5, {}, true);
  const auto minus = lap_sweep(p, 1, {-0.2, -0.1}, -1, 0.5, {}, true);
  REQUIRE(plus.solutions.size() == 2);
  REQUIRE(minus.solutions.size() == 2);
  double d = 0, m = 0;
  for (std::size_t i = 0; i < plus.solutions[1].size(); i++)
  {
    d = std::max(d, std::abs(minus.solutions[1][i] - std::conj(plus.solutions[1][i])));
    m = std::max(m, std::abs(plus.solutions[1][i]));
  }
  CHECK(d <= 1e-6 * m);
  CHECK(plus.outgoing);
  // the flux flips sign with the branch
  CHECK(minus.rows[1].flux_outer == doctest::Approx(-plus.rows[1].flux_outer).epsilon(1e-6));
}

TEST_CASE("sweep argument checks")
{
  const Problem p = small_problem();
  CHECK_THROWS_AS(lap_sweep(p, 1, {0.1, 0.2}), Error);
  CHECK_THROWS_AS(lap_sweep(p, 1, {0.1, -0.05}), Error);
  CHECK_THROWS_AS(lap_sweep(p, 1, {0.1, 0}), Error);
  // h above a tenth of the wavelength
  CHECK_THROWS_AS(lap_sweep(p, 9, {0.1, 0.05}), Error);
  const auto e = default_eps_list();
  REQUIRE(e.size() == 5);
  CHECK(e.front() == 0.4);
  CHECK(e.back() == 0.025);
}

TEST_CASE("uniqueness probe")
{
  const auto u = uniqueness_probe(small_problem(), 1, 40, 7);
  CHECK(u.trivial_kernel);
  CHECK(u.verdict == "TRIVIAL-KERNEL");
  CHECK(u.reduction < 1e-6);
}

TEST_CASE("eigenvalue probe")
{
  Problem flat = small_problem();
  flat.grid.sponge_width = 0;
  const auto r = eigenvalue_probe(flat, 0.5, 1.5, {6, 8, 10}, 6);
  CHECK(r.rows.size() == 3);
  CHECK(r.no_embedded);
  CHECK(r.verdict == "NO-EMBEDDED");

  Problem well = small_problem("gaussian_well(-5,1)");
  well.grid.sponge_width = 0;
  const auto w = eigenvalue_probe(well, -3, -0.05, {6, 8, 10}, 4);
  CHECK(w.stable_found);
  CHECK(w.no_embedded);
  CHECK(w.stable_lambda < 0);
  CHECK(w.best_drift < 1e-3);
}
