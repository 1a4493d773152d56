// SPDX-License-Identifier: Apache-2.0
#include "lapkit/lapkit.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "commands.hpp"

struct lapkit_config
{
  lapkit::Config cfg;
};

struct lapkit_solution
{
  lapkit::RunConfig rc;
  std::unique_ptr<lapkit::Grid> grid;
  lapkit::Field v, f;
  lapkit::SolveResult result;
  mutable bool have_norms = false;  // norms are computed on first request
  mutable lapkit::NormReport norms;
};

namespace
{

thread_local std::string g_last_error;

lapkit_status to_status(lapkit::ErrorCode c)
{
  return static_cast<lapkit_status>(static_cast<int>(c));
}

template <typename F>
lapkit_status guarded(F &&body)
{
  try
  {
    body();
    g_last_error.clear();
    return LAPKIT_OK;
  }
  catch (const lapkit::Error &e)
  {
    g_last_error = e.what();
    return to_status(e.code());
  }
  catch (const std::bad_alloc &)
  {
    g_last_error = "out of memory";
    return LAPKIT_INTERNAL_ERROR;
  }
  catch (const std::exception &e)
  {
    g_last_error = e.what();
    return LAPKIT_INTERNAL_ERROR;
  }
}

void need(const void *p, const char *what)
{
  if (!p)
    lapkit::fail(lapkit::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

lapkit_status copy_out(const std::string &s, char *buf, size_t cap, size_t *needed)
{
  if (needed)
    *needed = s.size() + 1;
  if (!buf)
    return LAPKIT_OK;
  if (cap < s.size() + 1)
  {
    g_last_error = "buffer too small";
    return LAPKIT_INVALID_ARGUMENT;
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return LAPKIT_OK;
}

}  // namespace

extern "C" {

const char *lapkit_version(void) { return "0.1.0"; }

const char *lapkit_last_error(void) { return g_last_error.c_str(); }

lapkit_status lapkit_config_parse(const char *text, lapkit_config **out)
{
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = nullptr;
    *out = new lapkit_config{lapkit::Config::parse(text)};
  });
}

lapkit_status lapkit_config_load(const char *path, lapkit_config **out)
{
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new lapkit_config{lapkit::Config::load(path)};
  });
}

lapkit_status lapkit_config_override(lapkit_config *cfg, const char *assignment)
{
  return guarded([&] {
    need(cfg, "cfg");
    need(assignment, "assignment");
    lapkit::Config copy = cfg->cfg;
    copy.override_with(assignment);
    cfg->cfg = std::move(copy);
  });
}

lapkit_status lapkit_config_get(const lapkit_config *cfg, const char *key, char *buf, size_t cap,
                                size_t *needed)
{
  std::string v;
  lapkit_status st = guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    v = cfg->cfg.get(key);
  });
  if (st == LAPKIT_INTERNAL_ERROR)
    st = LAPKIT_INVALID_ARGUMENT;  // unknown key
  return st != LAPKIT_OK ? st : copy_out(v, buf, cap, needed);
}

lapkit_status lapkit_config_echo(const lapkit_config *cfg, char *buf, size_t cap, size_t *needed)
{
  std::string e;
  const lapkit_status st = guarded([&] {
    need(cfg, "cfg");
    e = cfg->cfg.echo();
  });
  return st != LAPKIT_OK ? st : copy_out(e, buf, cap, needed);
}

void lapkit_config_free(lapkit_config *cfg) { delete cfg; }

lapkit_status lapkit_run(const char *command, const lapkit_config *cfg, const char *out_dir,
                         const char *log_path, int *exit_code)
{
  return guarded([&] {
    need(command, "command");
    need(cfg, "cfg");
    need(out_dir, "out_dir");
    need(exit_code, "exit_code");
    std::ostringstream log;
    *exit_code = lapkit::run_command(command, cfg->cfg, out_dir, log);
    if (log_path)
    {
      std::ofstream out(log_path, std::ios::binary);
      if (!out)
        lapkit::fail(lapkit::ErrorCode::Io, std::string("cannot write ") + log_path);
      out << log.str();
    }
  });
}

size_t lapkit_command_count(void) { return lapkit::command_names().size(); }

const char *lapkit_command_name(size_t i)
{
  const auto &n = lapkit::command_names();
  return i < n.size() ? n[i].c_str() : nullptr;
}

lapkit_status lapkit_solve(const lapkit_config *cfg, lapkit_solution **out)
{
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = nullptr;
    auto s = std::make_unique<lapkit_solution>();
    s->rc = lapkit::to_run_config(cfg->cfg);
    const lapkit::Problem &p = s->rc.problem;
    s->grid = std::make_unique<lapkit::Grid>(lapkit::build_grid(p.grid));
    s->f = lapkit::sample_source(*s->grid, p.source);
    const auto op = lapkit::assemble(p.coeffs, *s->grid, s->rc.lambda, s->rc.eps, p.op);
    s->result = lapkit::solve(op, s->f, p.solve);
    if (!s->result.ok())
      lapkit::fail(lapkit::ErrorCode::SolverFailed,
                   "solver stopped: " + lapkit::to_string(s->result.status));
    s->v = s->result.v;
    *out = s.release();
  });
}

lapkit_status lapkit_solution_info(const lapkit_solution *s, lapkit_solve_info *info)
{
  return guarded([&] {
    need(s, "solution");
    need(info, "info");
    info->iterations = s->result.iterations;
    info->converged = s->result.ok() ? 1 : 0;
    info->rel_residual = s->result.rel_residual;
    info->unknowns = s->grid->num_unknowns();
    info->h = s->grid->h();
  });
}

lapkit_status lapkit_solution_norms(const lapkit_solution *s, lapkit_norms *out)
{
  return guarded([&] {
    need(s, "solution");
    need(out, "out");
    if (!s->have_norms)
    {
      s->norms = lapkit::norm_report(s->v, s->f, s->rc.problem.coeffs, *s->grid, s->rc.lambda,
                                     s->rc.eps, s->rc.quad_degree);
      s->have_norms = true;
    }
    const auto &n = s->norms;
    *out = {n.X, n.Y, n.Ystar_f, n.gradY, n.tangL2, n.w3half, n.Q};
  });
}

lapkit_status lapkit_solution_eval(const lapkit_solution *s, const double x[3], double *re,
                                   double *im)
{
  return guarded([&] {
    need(s, "solution");
    need(x, "x");
    need(re, "re");
    need(im, "im");
    const lapkit::cplx z = lapkit::interpolate(*s->grid, s->v, {x[0], x[1], x[2]});
    *re = z.real();
    *im = z.imag();
  });
}

void lapkit_solution_free(lapkit_solution *s) { delete s; }

lapkit_status lapkit_potential_c(const char *electric, const double x[3], double *c)
{
  return guarded([&] {
    need(electric, "electric");
    need(x, "x");
    need(c, "c");
    lapkit::CoefficientSet cs;
    cs.electric = lapkit::parse_electric(electric);
    *c = cs.c({x[0], x[1], x[2]});
  });
}

}  // extern "C"
