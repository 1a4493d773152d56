// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion. Arguments select criteria
// by number (default: all). Exit status is nonzero if any selected one fails.
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "lap_lab.hpp"

using namespace lapkit;

namespace
{

constexpr double pi = std::numbers::pi;

struct Outcome
{
  bool pass = false;
  std::string detail;
};

RunConfig run_config(const std::string &text)
{
  return to_run_config(Config::parse(text, "<acceptance>"));
}

Grid make_grid(double h, double rmax, double sponge = 0)
{
  GridConfig gc;
  gc.h = h;
  gc.rmax = rmax;
  gc.sponge_width = sponge;
  return build_grid(gc);
}

double order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

// 1. (Delta + c + lambda + i eps) applied to (1 + i) e^{-r^2} against the analytic image.
Outcome operator_consistency()
{
  CoefficientSet cs;
  cs.electric = parse_electric("coulomb(1,1)");
  auto defect = [&](double h) {
    const Grid g = make_grid(h, 5);
    OperatorOptions o;
    o.truncation = Truncation::Dirichlet;
    o.closure = OuterClosure::Dirichlet;
    const DiscreteOperator op = assemble(cs, g, 1, 0.1, o);
    Field v = g.zeros();
    for (std::size_t i = 0; i < g.num_nodes(); i++)
      if (g.is_unknown(i))
        v[i] = cplx(1, 1) * std::exp(-dot(g.x(i), g.x(i)));
    const Field Lv = lapkit::apply(op, v);
    double worst = 0;
    for (std::size_t i = 0; i < g.num_nodes(); i++)
    {
      if (g.cls[i] != NodeClass::Interior)
        continue;
      const double r = norm(g.x(i));
      const cplx exact = cplx(1, 1) * (4 * r * r - 6 + 1 / r + cplx(1, 0.1)) *
                         std::exp(-r * r);
      worst = std::max(worst, std::abs(Lv[i] - exact));
    }
    return worst;
  };
  const double e1 = defect(0.25), e2 = defect(0.125), p = order(e1, e2);
  return {p >= 1.8, fmt::format("defect {:.3e} -> {:.3e}, order {:.3f} (>= 1.8)", e1, e2, p)};
}

// 2. Cartesian solve against the radial backend on |x| <= 4.
Outcome oracle_equivalence()
{
  const RunConfig rc = run_config(
      "[grid]\nh = 0.125\nrmax = 8\nsponge_width = 2\n"
      "[solve]\nmethod = bicgstab\nprecond = ilu0\n"
      "[problem]\nelectric = rational_well(-2)\nsource = gaussian(1,1)\nlambda = 1\neps = 0.1\n");
  const Problem &p = rc.problem;
  RadialProblem rp = rc.radial;
  rp.coeffs = radial_from(p.coeffs);
  const Grid g = build_grid(p.grid);
  const Field f = sample_source(g, p.source);
  const SolveResult sr = solve(assemble(p.coeffs, g, rc.lambda, rc.eps, p.op), f, p.solve);
  if (!sr.ok())
    return {false, "Cartesian solve did not converge: " + to_string(sr.status)};
  const Source src = p.source;
  const RadialSolution rs =
      reduce_and_solve_radial(rp, [&](double r) { return src(Vec3{r, 0, 0}); });
  double md = 0, mx = 0;
  for (std::size_t i = 0; i < g.num_nodes(); i++)
  {
    if (!g.in_domain(i) || norm(g.x(i)) > rc.compare_radius)
      continue;
    const cplx vr = rs.eval(g.x(i));
    md = std::max(md, std::abs(sr.v[i] - vr));
    mx = std::max(mx, std::abs(vr));
  }
  const double disc = md / mx;
  return {disc <= 0.02, fmt::format("max |v - v_rad| / max |v_rad| = {:.3e} (<= 0.02), {} iterations",
                                    disc, sr.iterations)};
}

// 3. Morawetz residual on manufactured pairs, and the obstacle boundary sign.
Outcome morawetz()
{
  const char *suite[][2] = {{"none", "none"},
                            {"none", "coulomb(1,1)"},
                            {"constant_field(0,0,0.5)", "gaussian_well(-5,1)"}};
  bool ok = true;
  std::string detail;
  for (const auto &entry : suite)
  {
    CoefficientSet cs;
    cs.magnetic = parse_magnetic(entry[0]);
    cs.electric = parse_electric(entry[1]);
    double rel[2] = {0, 0};
    const double hs[2] = {0.25, 0.125};
    for (int k = 0; k < 2; k++)
    {
      const Grid g = make_grid(hs[k], 8, 2.5);
      Field v, f;
      manufactured_gaussian(cs, g, 1, 0.3, SignConvention::OpL, v, f);
      rel[k] = morawetz_residual(v, f, cs, g, 1, 0.3, weights_std(2)).relative();
    }
    const double p = order(rel[0], rel[1]);
    ok = ok && rel[0] <= 0.05 && p >= 0.9;
    detail += fmt::format("[{}, {}] {:.2e} -> {:.2e} order {:.2f}; ", entry[0], entry[1], rel[0],
                          rel[1], p);
  }
  const RunConfig rc = run_config(
      "[grid]\nh = 0.25\nrmax = 6\nsponge_width = 2\nobstacle = ball:1\n"
      "[problem]\nelectric = coulomb(1,1)\nlambda = 1\neps = 0.3\n");
  const Problem &p = rc.problem;
  const Grid g = build_grid(p.grid);
  const SolveResult sr =
      solve(assemble(p.coeffs, g, rc.lambda, rc.eps, p.op), sample_source(g, p.source), p.solve);
  const ObstacleFlux of = obstacle_flux(sr.v, p.coeffs, g, weights_std(rc.weight_R));
  ok = ok && sr.ok() && of.integral <= 1e-8;
  detail += fmt::format("ball:1 boundary term {:.3e} (<= 1e-8)", of.integral);
  return {ok, detail};
}

// 4. Imaginary-part and energy identities on solved pairs.
Outcome identity_new1_check()
{
  bool ok = true;
  std::string detail;
  for (const char *electric : {"none", "coulomb(1,1)"})
  {
    const RunConfig rc = run_config(fmt::format(
        "[grid]\nh = 0.25\n[problem]\nelectric = {}\nlambda = 1\neps = 0.5\n", electric));
    const Problem &p = rc.problem;
    const Grid g = build_grid(p.grid);
    const Field f = sample_source(g, p.source);
    const DiscreteOperator op = assemble(p.coeffs, g, rc.lambda, rc.eps, p.op);
    const SolveResult sr = solve(op, f, p.solve);
    const New1Result n = identity_new1(sr.v, f, op);
    ok = ok && sr.ok() && n.res1 <= 1e-3 && n.res2 <= 1e-3;
    detail += fmt::format("[{}] {:.2e} {:.2e}; ", electric, n.res1, n.res2);
  }
  return {ok, detail + "(<= 1e-3)"};
}

// 5. Hardy ratio on random compactly supported fields.
Outcome hardy_suite()
{
  const Grid g = make_grid(0.25, 6, 0);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  std::normal_distribution<double> nd;
  CoefficientSet flat, ab;
  ab.magnetic = parse_magnetic("aharonov_bohm(1)");
  double worst = 0;
  int cases = 0;
  for (int t = 0; t < 100; t++)
  {
    // a few smooth bumps (1 - |x - c|^2 / rho^2)^3 with complex amplitudes
    Field w = g.zeros();
    const int bumps = 1 + t % 4;
    for (int k = 0; k < bumps; k++)
    {
      const Vec3 c{2.5 * u(rng), 2.5 * u(rng), 2.5 * u(rng)};
      const double rho = 0.6 + 1.4 * (u(rng) + 1);
      const cplx amp(nd(rng), nd(rng));
      for (std::size_t i = 0; i < g.num_nodes(); i++)
      {
        if (!g.in_domain(i))
          continue;
        const Vec3 d = g.x(i) - c;
        const double s = 1 - dot(d, d) / (rho * rho);
        if (s > 0)
          w[i] += amp * s * s * s;
      }
    }
    for (std::size_t i = 0; i < g.num_nodes(); i++)
      if (g.in_domain(i) && norm(g.x(i)) > 5)
        w[i] = 0;
    for (const CoefficientSet *cs : {&flat, &ab})
      for (double s : {1.0, 1.4})
      {
        worst = std::max(worst, hardy_check(w, *cs, g, s).ratio);
        cases++;
      }
  }
  return {worst <= 1 + 1e-3, fmt::format("{} cases, max ratio {:.4f} (<= 1.001)", cases, worst)};
}

// 6-8 share the Coulomb sweep.
struct SweepPair
{
  LapSweepResult plus, minus;
  Problem problem;
  double lambda = 1;
};

const SweepPair &coulomb_sweeps()
{
  static SweepPair s = [] {
    const RunConfig rc = run_config("[grid]\nh = 0.25\nrmax = 8\n[problem]\nelectric = coulomb(1,1)\n");
    SweepPair r;
    r.problem = rc.problem;
    r.lambda = rc.lambda;
    r.plus = lap_sweep(rc.problem, rc.lambda, rc.eps_list, rc.R0, rc.delta, rc.thresholds, true);
    std::vector<double> neg;
    for (double e : rc.eps_list)
      neg.push_back(-e);
    r.minus = lap_sweep(rc.problem, rc.lambda, neg, rc.R0, rc.delta, rc.thresholds, true);
    return r;
  }();
  return s;
}

Outcome lap_uniformity()
{
  const LapSweepResult &r = coulomb_sweeps().plus;
  if (r.partial)
    return {false, "sweep incomplete: " + r.failure};
  std::string cauchy;
  double wall = 0;
  for (const auto &row : r.rows)
  {
    wall += row.wall_time;
    if (!std::isnan(row.cauchy))
      cauchy += fmt::format(" {:.3e}", row.cauchy);
  }
  // the criterion timing covers both sweeps; the positive solves alone are reported here
  return {r.uniform && r.cauchy && r.outgoing,
          fmt::format("max Q / min Q {:.3f} (<= 4), Cauchy{}, {}, eps > 0 solves {:.0f} s", r.q_ratio,
                      cauchy, r.outgoing ? "OUTGOING" : "NOT-OUTGOING", wall)};
}

Outcome radiation_decay()
{
  const LapSweepResult &r = coulomb_sweeps().plus;
  if (r.partial)
    return {false, "sweep incomplete: " + r.failure};
  const RadiationReport &out = r.rows.back().radiation;
  const Problem &p = coulomb_sweeps().problem;
  const Grid g = build_grid(p.grid);
  const RadiationReport in =
      radiation_report(green_field(g, 1, false), CoefficientSet{}, g, 1, 0, 0.5);
  return {out.fitted && out.exponent <= -1 && in.fitted && in.exponent > -0.5,
          fmt::format("eps {} exponent {:.3f} (<= -1); incoming control {:.3f} (> -0.5, {})",
                      r.rows.back().eps, out.exponent, in.exponent, in.verdict)};
}

Outcome branch_selection()
{
  const SweepPair &s = coulomb_sweeps();
  if (s.plus.partial || s.minus.partial)
    return {false, "sweep incomplete"};
  double worst = 0;
  for (std::size_t k = 0; k < s.plus.solutions.size(); k++)
  {
    const Field &vp = s.plus.solutions[k], &vm = s.minus.solutions[k];
    double d = 0, m = 0;
    for (std::size_t i = 0; i < vp.size(); i++)
    {
      d = std::max(d, std::abs(vm[i] - std::conj(vp[i])));
      m = std::max(m, std::abs(vp[i]));
    }
    worst = std::max(worst, d / m);
  }
  return {worst <= 1e-6,
          fmt::format("max |v- - conj v+| / |v+|_inf = {:.3e} over {} pairs (<= 1e-6)", worst,
                      s.plus.solutions.size())};
}

// 9. Shift-invert probe across box sizes.
Outcome eigen_probe()
{
  const RunConfig flat = run_config("[grid]\nh = 0.5\n");
  const EigenProbeResult a =
      eigenvalue_probe(flat.problem, 0.5, 1.5, {6, 8, 10}, flat.nev, flat.thresholds);
  const RunConfig well = run_config("[grid]\nh = 0.5\n[problem]\nelectric = gaussian_well(-5,1)\n");
  const EigenProbeResult b =
      eigenvalue_probe(well.problem, -3, -0.05, {6, 8, 10}, 4, well.thresholds);
  const bool ok = a.no_embedded && b.stable_found && b.stable_lambda < 0 && b.best_drift < 1e-3;
  return {ok, fmt::format("flat: {}; well: eigenvalue {:.5f}, drift {:.2e} (< 1e-3)", a.verdict,
                          b.stable_lambda, b.best_drift)};
}

// 10. Shell indicator values and the Ydot / Ydot* pairing bound.
Outcome norm_units()
{
  const Grid g = make_grid(0.0625, 4);
  RealField m(g.num_nodes(), 0.0);
  for (std::size_t i = 0; i < g.num_nodes(); i++)
  {
    const double r = norm(g.x(i));
    if (g.in_domain(i) && r >= 1 && r < 2)
      m[i] = 1;
  }
  const double n1 = dyadic_norm(g, m, 1, 2, 2, 0), e1 = std::sqrt(28 * pi / 3);
  const double n2 = dyadic_norm(g, m, kInf, 2, 2, -0.5), e2 = std::sqrt(6 * pi);
  const double d1 = std::abs(n1 / e1 - 1), d2 = std::abs(n2 / e2 - 1);

  const Grid gd = make_grid(0.25, 6);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0, 1);
  const double h3 = std::pow(gd.h(), 3);
  const double rlo = std::ldexp(1.0, gd.shell_lo), rhi = std::ldexp(1.0, gd.shell_hi + 1);
  int violations = 0;
  for (int t = 0; t < 200; t++)
  {
    Field f = gd.zeros(), v = gd.zeros();
    const double rf = 0.5 + 5 * u(rng), rv = 0.5 + 5 * u(rng);
    for (std::size_t i = 0; i < gd.num_nodes(); i++)
    {
      const double r = norm(gd.x(i));
      if (!gd.in_domain(i) || r < rlo || r >= rhi)
        continue;
      if (r < rf)
        f[i] = {nd(rng), nd(rng)};
      v[i] = cplx(nd(rng), nd(rng)) * std::exp(-r / rv);
    }
    cplx pair = 0;
    for (std::size_t i = 0; i < gd.num_nodes(); i++)
      pair += f[i] * std::conj(v[i]) * h3;
    if (std::abs(pair) > ystar_norm(gd, magnitude(f)) * ydot_norm(gd, magnitude(v)) * (1 + 1e-12))
      violations++;
  }
  return {d1 <= 0.01 && d2 <= 0.01 && violations == 0,
          fmt::format("shell norms off by {:.2e}, {:.2e} (<= 0.01); duality violations {}/200", d1,
                      d2, violations)};
}

// 11. Two sweep runs through the command layer, compared byte for byte.
Outcome reproducibility()
{
  const Config cfg = Config::parse(
      "[grid]\nh = 0.5\nrmax = 8\nsponge_width = 2\n[problem]\nelectric = coulomb(1,1)\n");
  const std::filesystem::path base = "acceptance_repro";
  std::filesystem::remove_all(base);
  for (const char *run : {"a", "b"})
  {
    std::ostringstream log;
    if (run_command("sweep", cfg, (base / run).string(), log) == kExitSolver)
      return {false, "sweep failed: " + log.str()};
  }
  auto bytes = [](const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
  };
  std::string detail;
  bool ok = true;
  for (const char *file : {"sweep.csv", "radiation.csv", "config.echo", "verdict.txt"})
  {
    const std::string a = bytes(base / "a" / file), b = bytes(base / "b" / file);
    const bool same = !a.empty() && a == b;
    ok = ok && same;
    detail += fmt::format("{} {}; ", file, same ? "identical" : "DIFFERS");
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char **argv)
{
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
      {"operator consistency", operator_consistency},
      {"oracle equivalence", oracle_equivalence},
      {"Morawetz identity", morawetz},
      {"energy identities", identity_new1_check},
      {"magnetic Hardy suite", hardy_suite},
      {"LAP uniformity + Cauchy", lap_uniformity},
      {"radiation decay", radiation_decay},
      {"branch selection", branch_selection},
      {"eigenvalue probe", eigen_probe},
      {"norm unit tests", norm_units},
      {"reproducibility", reproducibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; i++)
    selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); k++)
  {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id))
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try
    {
      o = criteria[k].second();
    }
    catch (const std::exception &e)
    {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("{} criterion {:>2} ({}): {} [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", id,
               criteria[k].first, o.detail, secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  fmt::print("{} criterion(s) failed\n", failed);
  return failed == 0 ? 0 : 1;
}
