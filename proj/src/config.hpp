// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "identities.hpp"
#include "lap_lab.hpp"
#include "radial.hpp"

namespace lapkit
{

// Line-oriented `key = value` under `[section]` headers, `#` comments.
// Every key is checked against a fixed schema; the effective value of every
// schema key (given or default) is kept for the echo.
class Config
{
public:
  static Config parse(const std::string &text, const std::string &origin = "<config>");
  static Config load(const std::string &path);

  // "section.key=value"; unknown keys are rejected.
  void override_with(const std::string &assignment);
  void set(const std::string &key, const std::string &value);

  const std::string &get(const std::string &key) const;
  bool given(const std::string &key) const { return given_.count(key) > 0; }
  double real(const std::string &key) const;
  int integer(const std::string &key) const;
  std::vector<double> reals(const std::string &key) const;

  // Canonical form: every schema key in schema order, grouped by section.
  std::string echo() const;

  static std::vector<std::string> keys();

private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> given_;
};

// Typed view of a configuration.
struct RunConfig
{
  Problem problem;
  RadialProblem radial;
  int quad_degree = 32;
  double lambda = 1, eps = 0.1, delta = 0.5;
  std::vector<double> eps_list;
  double R0 = -1;
  double weight_R = 2;
  SignConvention convention = SignConvention::OpL;
  std::vector<double> h_list;
  double band_lo = 0.5, band_hi = 1.5;
  std::vector<double> rmax_list;
  int nev = 8;
  double compare_radius = 4, oracle_tol = 0.02;
  int cycles = 40;
  unsigned seed = 12345;
  Thresholds thresholds;
  std::string out_dir = "out";
};

RunConfig to_run_config(const Config &c);

}  // namespace lapkit
