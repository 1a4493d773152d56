// SPDX-License-Identifier: Apache-2.0
#include "config.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

namespace lapkit
{

namespace
{

struct KeySpec
{
  const char *key;
  const char *def;
};

// Schema order is echo order.
const KeySpec kSchema[] = {
    {"grid.h", "0.25"},
    {"grid.rmax", "8"},
    {"grid.obstacle", "none"},
    {"grid.sponge_width", "2.5"},
    {"quad.degree", "32"},
    {"op.truncation", "robin"},
    {"op.closure", "robin"},
    {"op.sponge_sigma", "-1"},
    {"op.sponge_power", "3"},
    {"op.clamp_radius", "-1"},
    {"solve.method", "gmres"},
    {"solve.precond", "jacobi"},
    {"solve.tol", "1e-8"},
    {"solve.maxit", "20000"},
    {"solve.restart", "60"},
    {"radial.lmax", "0"},
    {"radial.rfar", "-1"},
    {"radial.mesh_points", "8000"},
    {"radial.grading", "0"},
    {"problem.metric", "flat"},
    {"problem.magnetic", "none"},
    {"problem.electric", "none"},
    {"problem.source", "gaussian(1,1)"},
    {"problem.lambda", "1"},
    {"problem.eps", "0.1"},
    {"problem.eps_list", "0.4,0.2,0.1,0.05,0.025"},
    {"problem.delta", "0.5"},
    {"problem.R0", "-1"},
    {"problem.weight_R", "2"},
    {"problem.convention", "opl"},
    {"problem.h_list", "0.25,0.125"},
    {"problem.band", "0.5,1.5"},
    {"problem.rmax_list", "6,8,10"},
    {"problem.nev", "8"},
    {"problem.compare_radius", "4"},
    {"problem.cycles", "40"},
    {"problem.seed", "12345"},
    {"lap.uniform_ratio", "4"},
    {"lap.tol_cauchy", "0.25"},
    {"lap.drift", "0.01"},
    {"lap.outer_mass", "0.5"},
    {"lap.track_overlap", "0.5"},
    {"lap.kernel_reduction", "1e-6"},
    {"lap.radiating_exponent", "-1"},
    {"lap.fit_rmin", "1"},
    {"lap.oracle_tol", "0.02"},
    {"report.out", "out"},
};

const KeySpec *find_key(const std::string &k)
{
  for (const auto &s : kSchema)
    if (k == s.key)
      return &s;
  return nullptr;
}

std::string trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string &key, const std::string &v)
{
  try
  {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size())
      return d;
  }
  catch (const std::exception &)
  {
  }
  fail(ErrorCode::Parse, fmt::format("{}: '{}' is not a number", key, v));
}

}  // namespace

std::vector<std::string> Config::keys()
{
  std::vector<std::string> out;
  for (const auto &s : kSchema)
    out.emplace_back(s.key);
  return out;
}

Config Config::parse(const std::string &text, const std::string &origin)
{
  Config c;
  for (const auto &s : kSchema)
    c.values_[s.key] = s.def;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line))
  {
    lineno++;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    if (line.front() == '[')
    {
      if (line.back() != ']')
        fail(ErrorCode::Parse, fmt::format("{}:{}: malformed section header", origin, lineno));
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto &s : kSchema)
        known = known || std::string(s.key).rfind(section + ".", 0) == 0;
      if (!known)
        fail(ErrorCode::Parse, fmt::format("{}:{}: unknown section '{}'", origin, lineno, section));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::Parse, fmt::format("{}:{}: expected key = value", origin, lineno));
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos)
    {
      if (section.empty())
        fail(ErrorCode::Parse,
             fmt::format("{}:{}: key '{}' outside any section", origin, lineno, key));
      key = section + "." + key;
    }
    if (!find_key(key))
      fail(ErrorCode::Parse, fmt::format("{}:{}: unknown key '{}'", origin, lineno, key));
    if (c.given_.count(key))
      fail(ErrorCode::Parse, fmt::format("{}:{}: duplicate key '{}'", origin, lineno, key));
    c.values_[key] = value;
    c.given_[key] = true;
  }
  to_run_config(c);  // type-check every value now
  return c;
}

Config Config::load(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::Io, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void Config::set(const std::string &key, const std::string &value)
{
  if (!find_key(key))
    fail(ErrorCode::Parse, fmt::format("unknown key '{}'", key));
  values_[key] = trim(value);
  given_[key] = true;
}

void Config::override_with(const std::string &assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    fail(ErrorCode::Parse, fmt::format("override '{}' is not key=value", assignment));
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
  to_run_config(*this);
}

const std::string &Config::get(const std::string &key) const
{
  auto it = values_.find(key);
  if (it == values_.end())
    fail(ErrorCode::Internal, fmt::format("unknown key '{}'", key));
  return it->second;
}

double Config::real(const std::string &key) const
{
  return to_real(key, get(key));
}

int Config::integer(const std::string &key) const
{
  const double d = real(key);
  if (d != std::floor(d) || std::abs(d) > 2e9)
    fail(ErrorCode::Parse, fmt::format("{}: '{}' is not an integer", key, get(key)));
  return int(d);
}

std::vector<double> Config::reals(const std::string &key) const
{
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(to_real(key, trim(item)));
  return out;
}

std::string Config::echo() const
{
  std::string out, section;
  for (const auto &s : kSchema)
  {
    const std::string key = s.key;
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section)
    {
      if (!section.empty())
        out += "\n";
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + get(key) + "\n";
  }
  return out;
}

RunConfig to_run_config(const Config &c)
{
  RunConfig r;
  Problem &p = r.problem;
  p.grid.h = c.real("grid.h");
  p.grid.rmax = c.real("grid.rmax");
  p.grid.sponge_width = c.real("grid.sponge_width");
  p.grid.obstacle = parse_obstacle(c.get("grid.obstacle"));
  if (!(p.grid.h > 0) || !(p.grid.rmax > p.grid.h))
    fail(ErrorCode::Parse, "grid.h must be positive and smaller than grid.rmax");
  r.quad_degree = c.integer("quad.degree");
  if (r.quad_degree < 2)
    fail(ErrorCode::Parse, "quad.degree must be at least 2");

  p.op.truncation = parse_truncation(c.get("op.truncation"));
  p.op.closure = parse_closure(c.get("op.closure"));
  p.op.sponge_sigma = c.real("op.sponge_sigma");
  p.op.sponge_power = c.real("op.sponge_power");
  p.op.clamp_radius = c.real("op.clamp_radius");

  p.solve.method = parse_method(c.get("solve.method"));
  p.solve.precond = parse_precond(c.get("solve.precond"));
  p.solve.tol = c.real("solve.tol");
  p.solve.maxit = c.integer("solve.maxit");
  p.solve.restart = c.integer("solve.restart");
  if (!(p.solve.tol > 0) || p.solve.maxit < 1 || p.solve.restart < 1)
    fail(ErrorCode::Parse, "solve.tol, solve.maxit and solve.restart must be positive");

  p.coeffs.metric = parse_metric(c.get("problem.metric"));
  p.coeffs.magnetic = parse_magnetic(c.get("problem.magnetic"));
  p.coeffs.electric = parse_electric(c.get("problem.electric"));
  p.source = parse_source(c.get("problem.source"));

  r.lambda = c.real("problem.lambda");
  r.eps = c.real("problem.eps");
  r.eps_list = c.reals("problem.eps_list");
  r.delta = c.real("problem.delta");
  r.R0 = c.real("problem.R0");
  r.weight_R = c.real("problem.weight_R");
  r.convention = parse_sign_convention(c.get("problem.convention"));
  r.h_list = c.reals("problem.h_list");
  const auto band = c.reals("problem.band");
  if (band.size() != 2)
    fail(ErrorCode::Parse, "problem.band needs two values lo,hi");
  r.band_lo = band[0];
  r.band_hi = band[1];
  r.rmax_list = c.reals("problem.rmax_list");
  r.nev = c.integer("problem.nev");
  r.compare_radius = c.real("problem.compare_radius");
  r.cycles = c.integer("problem.cycles");
  const int seed = c.integer("problem.seed");
  if (seed < 0)
    fail(ErrorCode::Parse, "problem.seed must be non-negative");
  r.seed = unsigned(seed);

  Thresholds &t = r.thresholds;
  t.uniform_ratio = c.real("lap.uniform_ratio");
  t.tol_cauchy = c.real("lap.tol_cauchy");
  t.drift = c.real("lap.drift");
  t.outer_mass = c.real("lap.outer_mass");
  t.track_overlap = c.real("lap.track_overlap");
  t.kernel_reduction = c.real("lap.kernel_reduction");
  t.radiating_exponent = c.real("lap.radiating_exponent");
  t.fit_rmin = c.real("lap.fit_rmin");
  r.oracle_tol = c.real("lap.oracle_tol");

  RadialProblem &rp = r.radial;
  rp.lmax = c.integer("radial.lmax");
  const double rfar = c.real("radial.rfar");
  rp.r_far = rfar > 0 ? rfar : 4 * p.grid.rmax;
  rp.mesh_points = c.integer("radial.mesh_points");
  rp.grading = c.real("radial.grading");
  rp.lambda = r.lambda;
  rp.eps = r.eps;
  rp.r_obs = p.grid.obstacle.empty() ? 0.0 : p.grid.obstacle.max_radius();

  r.out_dir = c.get("report.out");
  return r;
}

}  // namespace lapkit
