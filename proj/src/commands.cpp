// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <filesystem>
#include <fmt/format.h>
#include <fstream>

namespace lapkit
{

std::string csv_real(double x)
{
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

std::string csv_field(const std::string &s)
{
  if (s.find_first_of(",\"\n\r") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s)
  {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

const std::vector<std::string> &command_names()
{
  static const std::vector<std::string> names = {"validate",   "solve",          "sweep",
                                                 "identities", "norms",          "oracle-compare",
                                                 "eig-probe"};
  return names;
}

namespace
{

namespace fs = std::filesystem;

class Csv
{
public:
  Csv(const fs::path &path, const std::vector<std::string> &header) : out_(path, std::ios::binary)
  {
    if (!out_)
      fail(ErrorCode::Io, "cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string> &cells)
  {
    for (std::size_t i = 0; i < cells.size(); i++)
      out_ << (i ? "," : "") << cells[i];
    out_ << "\r\n";
  }

private:
  std::ofstream out_;
};

std::string b(bool v) { return v ? "true" : "false"; }
const auto &R = csv_real;

void write_text(const fs::path &p, const std::string &text)
{
  std::ofstream out(p, std::ios::binary);
  if (!out)
    fail(ErrorCode::Io, "cannot write " + p.string());
  out << text;
}

struct Ctx
{
  const Config &cfg;
  RunConfig rc;
  fs::path out;
  std::ostream &log;
  std::string summary;

  void verdict(const std::string &line)
  {
    summary += line + "\n";
    log << line << "\n";
  }
};

SolveResult solve_or_throw(const DiscreteOperator &op, const Field &f, const SolveOptions &so)
{
  SolveResult sr = solve(op, f, so);
  if (!sr.ok())
    fail(ErrorCode::SolverFailed,
         fmt::format("solver {} stopped: {} after {} iterations (residual {:.3e})",
                     to_string(sr.method), to_string(sr.status), sr.iterations, sr.rel_residual));
  return sr;
}

int cmd_validate(Ctx &c)
{
  const Problem &p = c.rc.problem;
  const Grid g = build_grid(p.grid);
  const AssumptionReport ar = assumption_report(p.coeffs, g);
  Csv csv(c.out / "assumptions.csv", {"name", "kind", "value", "tail", "unbounded", "note"});
  for (const Functional *f : ar.entries())
  {
    csv.row({f->name, f->kind, R(f->value), R(f->tail), b(f->unbounded), csv_field(f->note)});
    c.log << fmt::format("{:<14} {:<5} {:>14.6g}{}\n", f->name, f->kind, f->value,
                         f->unbounded ? "  UNBOUNDED" : "");
  }
  csv.row({"starshaped", "check", R(ar.starshaped.worst_value), "0", b(!ar.starshaped.ok),
           csv_field(ar.starshaped.note)});
  c.log << "shells j in [" << ar.j_min << ", " << ar.j_max << "]; " << ar.mapping << "\n";
  if (!ar.starshaped.ok)
    c.verdict("STARSHAPED: FAIL");
  const bool unb = ar.any_unbounded();
  c.verdict(unb ? "ASSUMPTIONS: UNBOUNDED" : "ASSUMPTIONS: FINITE");
  if (unb)
    return kExitUnbounded;
  return ar.starshaped.ok ? kExitOk : kExitVerdict;
}

int cmd_solve(Ctx &c)
{
  const Problem &p = c.rc.problem;
  const Grid g = build_grid(p.grid);
  const Field f = sample_source(g, p.source);
  const DiscreteOperator op = assemble(p.coeffs, g, c.rc.lambda, c.rc.eps, p.op);
  const SolveResult sr = solve_or_throw(op, f, p.solve);
  Csv csv(c.out / "solve.csv", {"lambda", "eps", "h", "unknowns", "method", "precond", "iterations",
                                "rel_residual", "status"});
  csv.row({R(c.rc.lambda), R(c.rc.eps), R(g.h()), std::to_string(g.num_unknowns()),
           to_string(p.solve.method), to_string(p.solve.precond), std::to_string(sr.iterations),
           R(sr.rel_residual), to_string(sr.status)});
  Csv prof(c.out / "profile.csv", {"x", "re", "im"});
  for (int i = g.M; i < g.n; i++)
  {
    const std::size_t node = g.index(i, g.M, g.M);
    prof.row({R(g.x(node)[0]), R(sr.v[node].real()), R(sr.v[node].imag())});
  }
  c.log << fmt::format("{} unknowns, {} iterations, residual {:.3e}, {:.1f} s\n", g.num_unknowns(),
                       sr.iterations, sr.rel_residual, sr.wall_time);
  c.verdict("SOLVE: CONVERGED");
  return kExitOk;
}

void write_norms_row(Csv &csv, const std::string &tag, const NormReport &n)
{
  csv.row({csv_field(tag), R(n.lambda), R(n.eps), R(n.X), R(n.Y), R(n.Ystar_f), R(n.gradY),
           R(n.tangL2), R(n.w3half), R(n.Q)});
}

int cmd_norms(Ctx &c)
{
  const Problem &p = c.rc.problem;
  const Grid g = build_grid(p.grid);
  const Field f = sample_source(g, p.source);
  const DiscreteOperator op = assemble(p.coeffs, g, c.rc.lambda, c.rc.eps, p.op);
  const SolveResult sr = solve_or_throw(op, f, p.solve);
  const NormReport n = norm_report(sr.v, f, p.coeffs, g, c.rc.lambda, c.rc.eps, c.rc.quad_degree);
  {
    Csv csv(c.out / "norms.csv",
            {"tag", "lambda", "eps", "X", "Y", "Ystar_f", "gradY", "tangL2", "w3half", "Q"});
    write_norms_row(csv, "solution", n);
  }
  {
    Csv csv(c.out / "norms_mixed.csv", {"label", "p", "q", "r", "weight", "value"});
    for (const auto &m : n.mixed)
      csv.row({csv_field(m.label), R(m.p), R(m.q), R(m.r), R(m.w), R(m.value)});
  }
  if (c.rc.lambda > 0)
  {
    const RadiationReport rr =
        radiation_report(sr.v, p.coeffs, g, c.rc.lambda, c.rc.eps, c.rc.delta, c.rc.thresholds);
    Csv csv(c.out / "radiation.csv", {"R", "D", "mass", "flux"});
    for (std::size_t i = 0; i < rr.radii.size(); i++)
      csv.row({R(rr.radii[i]), R(rr.D[i]), R(rr.mass[i]), R(rr.flux[i])});
  }
  c.log << fmt::format("X {:.6g}  Y {:.6g}  Y*(f) {:.6g}  gradY {:.6g}  tangL2 {:.6g}  Q {:.6g}\n", n.X,
                       n.Y, n.Ystar_f, n.gradY, n.tangL2, n.Q);
  c.verdict(n.Q_infinite ? "NORMS: Q INFINITE" : "NORMS: OK");
  return kExitOk;
}

int cmd_sweep(Ctx &c)
{
  const RunConfig &rc = c.rc;
  const LapSweepResult res =
      lap_sweep(rc.problem, rc.lambda, rc.eps_list, rc.R0, rc.delta, rc.thresholds);
  {
    Csv csv(c.out / "sweep.csv",
            {"eps", "iterations", "rel_residual", "status", "X", "Y", "Ystar_f", "gradY", "tangL2",
             "Q", "flux_inner", "flux_outer", "h1_norm", "cauchy", "decay_exponent"});
    for (const auto &r : res.rows)
      csv.row({R(r.eps), std::to_string(r.iterations), R(r.rel_residual), r.status, R(r.norms.X),
               R(r.norms.Y), R(r.norms.Ystar_f), R(r.norms.gradY), R(r.norms.tangL2), R(r.Q),
               R(r.flux_inner), R(r.flux_outer), R(r.h1_norm), R(r.cauchy),
               R(r.radiation.exponent)});
  }
  if (!res.rows.empty() && !res.partial)
  {
    const RadiationReport &rr = res.rows.back().radiation;
    Csv csv(c.out / "radiation.csv", {"R", "D", "mass", "flux"});
    for (std::size_t i = 0; i < rr.radii.size(); i++)
      csv.row({R(rr.radii[i]), R(rr.D[i]), R(rr.mass[i]), R(rr.flux[i])});
  }
  for (const auto &r : res.rows)
    c.log << fmt::format("eps {:<8g} it {:<6} Q {:.6g}  wall {:.1f} s\n", r.eps, r.iterations, r.Q,
                         r.wall_time);
  if (res.partial)
  {
    c.verdict("SWEEP: PARTIAL (" + res.failure + ")");
    return kExitSolver;
  }
  c.verdict(fmt::format("{} (max Q / min Q = {:.4g})", res.uniform ? "UNIFORM" : "NON-UNIFORM",
                        res.q_ratio));
  c.verdict(res.cauchy ? "CAUCHY" : "NOT-CAUCHY");
  c.verdict(res.outgoing ? "OUTGOING" : "NOT-OUTGOING");
  c.verdict("RADIATION: " + res.rows.back().radiation.verdict);
  return res.all_pass() ? kExitOk : kExitVerdict;
}

int cmd_identities(Ctx &c)
{
  const RunConfig &rc = c.rc;
  const Problem &p = rc.problem;
  Csv csv(c.out / "identities.csv",
          {"name", "regime_ok", "lhs", "rhs_structural", "ratio", "residual", "h"});
  Csv terms(c.out / "morawetz.csv",
            {"h", "R", "I_grad", "I_v", "I_v_delta", "I_eps", "I_b", "I_f", "flux_out", "flux_in",
             "residual", "normalization"});
  bool ok = true;
  std::vector<double> hs, rels;
  for (double h : rc.h_list)
  {
    GridConfig gc = p.grid;
    gc.h = h;
    const Grid g = build_grid(gc);
    Field v, f;
    manufactured_gaussian(p.coeffs, g, rc.lambda, rc.eps, rc.convention, v, f);
    MorawetzOptions mo;
    mo.convention = rc.convention;
    const MorawetzBreakdown mb =
        morawetz_residual(v, f, p.coeffs, g, rc.lambda, rc.eps, weights_std(rc.weight_R), mo);
    csv.row({"morawetz", "true", R(mb.volume_total), R(mb.flux_out - mb.flux_in), R(mb.relative()),
             R(mb.residual), R(h)});
    terms.row({R(h), R(mb.R), R(mb.I_grad), R(mb.I_v), R(mb.I_v_delta), R(mb.I_eps), R(mb.I_b),
               R(mb.I_f), R(mb.flux_out), R(mb.flux_in), R(mb.residual), R(mb.normalization)});
    c.log << fmt::format("h {:<6g} morawetz residual / normalization {:.4e}\n", h, mb.relative());
    hs.push_back(h);
    rels.push_back(mb.relative());
  }
  if (hs.size() >= 2)
  {
    const std::size_t k = hs.size() - 1;
    const double order = std::log(rels[k - 1] / rels[k]) / std::log(hs[k - 1] / hs[k]);
    csv.row({"morawetz_order", "true", R(rels[k - 1]), R(rels[k]), R(order), "0", R(hs[k])});
    const bool pass = order >= 0.9;
    ok = ok && pass;
    c.verdict(fmt::format("MORAWETZ ORDER {:.3f}: {}", order, pass ? "PASS" : "FAIL"));
  }

  // solved pair on the configured grid
  const Grid g = build_grid(p.grid);
  const Field f = sample_source(g, p.source);
  const DiscreteOperator op = assemble(p.coeffs, g, rc.lambda, rc.eps, p.op);
  const SolveResult sr = solve_or_throw(op, f, p.solve);
  const New1Result n1 = identity_new1(sr.v, f, op, rc.convention);
  csv.row({"new1_eps", "true", R(n1.lhs1 + n1.trunc1), R(n1.rhs1), R(n1.res1), R(n1.res1_raw), R(g.h())});
  csv.row({"new1_energy", "true", R(n1.lhs2), R(n1.rhs2 + n1.trunc2), R(n1.res2), R(n1.res2_raw),
           R(g.h())});
  const bool new1_ok = n1.res1 <= 1e-3 && n1.res2 <= 1e-3;
  ok = ok && new1_ok;
  c.verdict(fmt::format("NEW1 residuals {:.2e} {:.2e}: {}", n1.res1, n1.res2,
                        new1_ok ? "PASS" : "FAIL"));
  if (!p.grid.obstacle.empty())
  {
    const ObstacleFlux of = obstacle_flux(sr.v, p.coeffs, g, weights_std(rc.weight_R));
    csv.row({"obstacle_flux", "true", R(of.integral), "0", R(of.max_density), "0", R(g.h())});
    const bool pass = of.integral <= 1e-8;
    ok = ok && pass;
    c.verdict(fmt::format("OBSTACLE FLUX {:.3e}: {}", of.integral, pass ? "PASS" : "FAIL"));
  }
  if (rc.lambda > 0)
    for (const LemmaRow &r :
         lemma_inequality_suite(sr.v, f, p.coeffs, g, rc.lambda, rc.eps, rc.delta))
      csv.row({r.name, b(r.regime_ok), R(r.lhs), R(r.rhs_structural), R(r.ratio), R(r.residual),
               R(r.h)});
  return ok ? kExitOk : kExitVerdict;
}

int cmd_oracle_compare(Ctx &c)
{
  const RunConfig &rc = c.rc;
  const Problem &p = rc.problem;
  if (p.coeffs.has_magnetic())
    fail(ErrorCode::InvalidArgument, "oracle-compare needs b = 0");
  RadialProblem rp = rc.radial;
  rp.coeffs = radial_from(p.coeffs);
  const Grid g = build_grid(p.grid);
  const Field f = sample_source(g, p.source);
  const DiscreteOperator op = assemble(p.coeffs, g, rc.lambda, rc.eps, p.op);
  const SolveResult sr = solve_or_throw(op, f, p.solve);
  const bool centered = norm(p.source.center) == 0 && rp.lmax == 0;
  const Source src = p.source;
  const RadialSolution rs =
      centered ? reduce_and_solve_radial(rp, [&](double r) { return src(Vec3{r, 0, 0}); })
               : reduce_and_solve(rp, [&](const Vec3 &x) { return src(x); });
  double md = 0, mx = 0, mrel = 0;
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.in_domain(node))
      continue;
    const Vec3 x = g.x(node);
    if (norm(x) > rc.compare_radius)
      continue;
    const cplx vr = rs.eval(x);
    const double d = std::abs(sr.v[node] - vr);
    md = std::max(md, d);
    mx = std::max(mx, std::abs(vr));
    if (std::abs(vr) > 0)
      mrel = std::max(mrel, d / std::abs(vr));
  }
  const double disc = mx > 0 ? md / mx : md;
  {
    Csv csv(c.out / "oracle.csv", {"compare_radius", "h", "max_abs_diff", "max_abs_oracle",
                                   "max_rel_discrepancy", "pointwise_max_rel", "harmonic_tail"});
    csv.row({R(rc.compare_radius), R(g.h()), R(md), R(mx), R(disc), R(mrel), R(rs.tail)});
  }
  {
    Csv csv(c.out / "oracle_profile.csv", {"x", "re", "im", "oracle_re", "oracle_im"});
    for (int i = g.M; i < g.n; i++)
    {
      const std::size_t node = g.index(i, g.M, g.M);
      const Vec3 x = g.x(node);
      if (norm(x) > rc.compare_radius)
        break;
      const cplx vr = rs.eval(x);
      csv.row({R(x[0]), R(sr.v[node].real()), R(sr.v[node].imag()), R(vr.real()), R(vr.imag())});
    }
  }
  const bool pass = disc <= rc.oracle_tol;
  c.verdict(fmt::format("ORACLE max relative discrepancy {:.4e} (tol {}): {}", disc,
                        fmt_real(rc.oracle_tol), pass ? "PASS" : "FAIL"));
  return pass ? kExitOk : kExitVerdict;
}

int cmd_eig_probe(Ctx &c)
{
  const RunConfig &rc = c.rc;
  const EigenProbeResult res = eigenvalue_probe(rc.problem, rc.band_lo, rc.band_hi, rc.rmax_list,
                                                rc.nev, rc.thresholds);
  Csv csv(c.out / "eig.csv", {"rmax", "unknowns", "lanczos_steps", "converged", "lambda",
                              "residual", "outer_fraction", "overlap", "drift", "stable"});
  for (const auto &row : res.rows)
  {
    if (row.values.empty())
      csv.row({R(row.rmax), std::to_string(row.unknowns), std::to_string(row.lanczos_steps),
               b(row.converged), "nan", "nan", "nan", "nan", "nan", "false"});
    for (const auto &e : row.values)
      csv.row({R(row.rmax), std::to_string(row.unknowns), std::to_string(row.lanczos_steps),
               b(row.converged), R(e.lambda), R(e.residual), R(e.outer_fraction), R(e.overlap), R(e.drift),
               b(e.stable)});
  }
  if (res.stable_found)
    c.verdict(fmt::format("STABLE EIGENVALUE {:.8g} (drift {:.3e})", res.stable_lambda,
                          res.best_drift));
  c.verdict(res.verdict);
  return res.no_embedded ? kExitOk : kExitVerdict;
}

}  // namespace

int run_command(const std::string &name, const Config &cfg, const std::string &out_dir,
                std::ostream &log)
{
  try
  {
    Ctx c{cfg, to_run_config(cfg), fs::path(out_dir), log, {}};
    fs::create_directories(c.out);
    write_text(c.out / "config.echo", cfg.echo());
    int code;
    if (name == "validate")
      code = cmd_validate(c);
    else if (name == "solve")
      code = cmd_solve(c);
    else if (name == "sweep")
      code = cmd_sweep(c);
    else if (name == "identities")
      code = cmd_identities(c);
    else if (name == "norms")
      code = cmd_norms(c);
    else if (name == "oracle-compare")
      code = cmd_oracle_compare(c);
    else if (name == "eig-probe")
      code = cmd_eig_probe(c);
    else
      fail(ErrorCode::InvalidArgument, "unknown command '" + name + "'");
    write_text(c.out / "verdict.txt", c.summary);
    return code;
  }
  catch (const Error &e)
  {
    log << "error: " << e.what() << "\n";
    switch (e.code())
    {
      case ErrorCode::SolverFailed:
      case ErrorCode::Numerical:
        return kExitSolver;
      default:
        return kExitUsage;
    }
  }
  catch (const std::exception &e)
  {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace lapkit
