// SPDX-License-Identifier: Apache-2.0
// Exercises the C interface only: handles, status codes, last-error text.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "lapkit/lapkit.h"

namespace
{

int failures = 0;

void check(bool ok, const char *what)
{
  std::printf("%s %s\n", ok ? "ok  " : "FAIL", what);
  if (!ok)
    failures++;
}

std::string get(const lapkit_config *cfg, const char *key)
{
  size_t n = 0;
  if (lapkit_config_get(cfg, key, nullptr, 0, &n) != LAPKIT_OK)
    return "<error>";
  std::string s(n, '\0');
  lapkit_config_get(cfg, key, s.data(), n, &n);
  return s.c_str();
}

}  // namespace

int main()
{
  check(std::strlen(lapkit_version()) > 0, "version string");

  lapkit_config *cfg = nullptr;
  check(lapkit_config_parse("[grid]\nhh = 1\n", &cfg) == LAPKIT_PARSE_ERROR, "unknown key rejected");
  check(cfg == nullptr, "no handle on failure");
  check(std::string(lapkit_last_error()).find("grid.hh") != std::string::npos,
        "last error names the key");
  check(lapkit_config_parse(nullptr, &cfg) == LAPKIT_INVALID_ARGUMENT, "NULL text rejected");

  const char *text =
      "[grid]\nh = 0.5\nrmax = 6\nsponge_width = 0\n[problem]\nelectric = coulomb(1,1)\n"
      "lambda = 1\neps = 0.2\n";
  check(lapkit_config_parse(text, &cfg) == LAPKIT_OK, "parse");
  check(std::strlen(lapkit_last_error()) == 0, "last error cleared on success");
  check(get(cfg, "grid.h") == "0.5", "get");
  check(lapkit_config_override(cfg, "problem.eps=0.25") == LAPKIT_OK, "override");
  check(get(cfg, "problem.eps") == "0.25", "override visible");
  check(lapkit_config_override(cfg, "problem.epsilon=1") != LAPKIT_OK, "bad override rejected");
  check(get(cfg, "problem.eps") == "0.25", "failed override leaves config intact");
  check(get(cfg, "nope.key") == "<error>", "unknown get key");

  size_t need = 0;
  check(lapkit_config_echo(cfg, nullptr, 0, &need) == LAPKIT_OK && need > 1, "echo size query");
  std::string echo(need, '\0');
  char tiny[4];
  check(lapkit_config_echo(cfg, tiny, sizeof tiny, &need) == LAPKIT_INVALID_ARGUMENT,
        "small buffer rejected");
  check(lapkit_config_echo(cfg, echo.data(), echo.size(), &need) == LAPKIT_OK, "echo");
  lapkit_config *again = nullptr;
  check(lapkit_config_parse(echo.c_str(), &again) == LAPKIT_OK, "echo parses");
  std::string echo2(need, '\0');
  lapkit_config_echo(again, echo2.data(), echo2.size(), &need);
  check(echo == echo2, "echo round trip");
  lapkit_config_free(again);

  bool has_sweep = false;
  for (size_t i = 0; i < lapkit_command_count(); i++)
    has_sweep = has_sweep || std::strcmp(lapkit_command_name(i), "sweep") == 0;
  check(has_sweep, "command list");
  check(lapkit_command_name(lapkit_command_count()) == nullptr, "command index bound");

  lapkit_solution *sol = nullptr;
  check(lapkit_solve(cfg, &sol) == LAPKIT_OK && sol, "solve");
  lapkit_solve_info info{};
  check(lapkit_solution_info(sol, &info) == LAPKIT_OK, "info");
  check(info.converged == 1 && info.rel_residual <= 1e-8 && info.h == 0.5, "info values");
  lapkit_norms nr{};
  check(lapkit_solution_norms(sol, &nr) == LAPKIT_OK, "norms");
  check(std::isfinite(nr.Q) && nr.Q > 0 && nr.Y > 0, "norm values");
  const double x[3] = {1.0, 0.5, 0.0};
  double re = 0, im = 0;
  check(lapkit_solution_eval(sol, x, &re, &im) == LAPKIT_OK, "eval");
  check(std::isfinite(re) && std::isfinite(im) && (re != 0 || im != 0), "eval value");
  check(lapkit_solution_eval(nullptr, x, &re, &im) == LAPKIT_INVALID_ARGUMENT, "NULL solution");
  lapkit_solution_free(sol);

  double c = 0;
  const double p[3] = {1, 2, 2};
  check(lapkit_potential_c("coulomb(1,1)", p, &c) == LAPKIT_OK && std::abs(c - 1.0 / 3) < 1e-15,
        "potential");
  check(lapkit_potential_c("yukawa(1)", p, &c) == LAPKIT_PARSE_ERROR, "unknown potential");

  const std::string out = "capi_out";
  int code = -1;
  check(lapkit_run("validate", cfg, out.c_str(), (out + "/run.log").c_str(), &code) == LAPKIT_OK &&
            code == 0,
        "run validate");
  check(std::filesystem::exists(out + "/assumptions.csv"), "validate writes its CSV");
  std::ifstream echo_file(out + "/config.echo", std::ios::binary);
  std::string written((std::istreambuf_iterator<char>(echo_file)), {});
  check(written == echo.c_str(), "config.echo matches the echo");
  check(lapkit_run("bogus", cfg, out.c_str(), nullptr, &code) == LAPKIT_OK && code == 1,
        "unknown command exit code");

  lapkit_config_free(cfg);
  lapkit_config_free(nullptr);
  lapkit_solution_free(nullptr);
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
