// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "commands.hpp"
#include "config.hpp"

using namespace lapkit;

TEST_CASE("defaults and echo round trip")
{
  const Config c = Config::parse("");
  CHECK(c.get("grid.h") == "0.25");
  CHECK(c.real("problem.lambda") == 1);
  CHECK(c.reals("problem.eps_list").size() == 5);
  const std::string e = c.echo();
  CHECK(e.rfind("[grid]", 0) == 0);
  const Config back = Config::parse(e, "echo");
  CHECK(back.echo() == e);
  for (const auto &k : Config::keys())
    CHECK(back.get(k) == c.get(k));
}

TEST_CASE("parsing sections, comments and overrides")
{
  Config c = Config::parse("# comment\n[grid]\nh = 0.5  # trailing\nrmax=6\n\n[problem]\nelectric = "
                           "coulomb(1,1)\n");
  CHECK(c.real("grid.h") == 0.5);
  CHECK(c.integer("grid.rmax") == 6);
  CHECK(c.get("problem.electric") == "coulomb(1,1)");
  CHECK(c.given("grid.h"));
  CHECK_FALSE(c.given("grid.sponge_width"));
  c.override_with("problem.lambda=2.5");
  CHECK(c.real("problem.lambda") == 2.5);
  CHECK_THROWS_AS(c.override_with("problem.lambda"), Error);
  CHECK_THROWS_AS(c.override_with("problem.lamda=1"), Error);

  const Config again = Config::parse(c.echo());
  CHECK(again.echo() == c.echo());

  const RunConfig rc = to_run_config(c);
  CHECK(rc.problem.grid.h == 0.5);
  CHECK(rc.lambda == 2.5);
  CHECK(rc.radial.r_far == doctest::Approx(24));  // 4 rmax
  CHECK(rc.eps_list.front() == 0.4);
}

TEST_CASE("errors name the key and the line")
{
  CHECK_THROWS_WITH_AS(Config::parse("[grid]\nhh = 1\n", "bad.ini"),
                       "bad.ini:2: unknown key 'grid.hh'", Error);
  CHECK_THROWS_WITH_AS(Config::parse("[grids]\n", "x"), doctest::Contains("x:1"), Error);
  CHECK_THROWS_WITH_AS(Config::parse("[grid]\nh = 1\nh = 2\n", "x"), doctest::Contains("x:3"),
                       Error);
  CHECK_THROWS_WITH_AS(Config::parse("[grid]\nh\n", "x"), doctest::Contains("x:2"), Error);
  CHECK_THROWS_AS(to_run_config(Config::parse("[grid]\nh = abc\n")), Error);
  CHECK_THROWS_AS(to_run_config(Config::parse("[solve]\nmethod = cg\n")), Error);
  CHECK_THROWS_AS(to_run_config(Config::parse("[problem]\nelectric = yukawa(1)\n")), Error);
}

TEST_CASE("csv helpers")
{
  CHECK(csv_real(0.1) == "0.10000000000000001");
  CHECK(csv_real(1) == "1");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("coulomb(1,1)") == "\"coulomb(1,1)\"");
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("q\"t") == "\"q\"\"t\"");
}

TEST_CASE("validate command exit codes")
{
  const std::string dir = "test_config_out";
  std::ostringstream log;
  CHECK(run_command("validate", Config::parse(""), dir, log) == kExitOk);
  const Config isq = Config::parse("[problem]\nelectric = coulomb(1,2)\n");
  std::ostringstream log2;
  CHECK(run_command("validate", isq, dir, log2) == kExitOk);
  CHECK(log2.str().find("kappa_c") != std::string::npos);
  std::ostringstream log3;
  CHECK(run_command("nonsense", isq, dir, log3) == kExitUsage);
}
