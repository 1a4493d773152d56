// SPDX-License-Identifier: Apache-2.0
#include "coefficients.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>

namespace lapkit
{

namespace
{

// Cartesian derivatives of a radial function F(|x|) from its radial jet.
struct RadialDerivs
{
  double F, d1[3], d2[3][3], d3[3][3][3];
};

RadialDerivs radial_derivs(const Jet1 &F, const Vec3 &x, double r)
{
  RadialDerivs out{};
  const double f1 = F.d[1] / r;
  const double f2 = (F.d[2] - f1) / (r * r);
  const double f3 = (F.d[3] - 3 * (F.d[2] - f1) / r) / (r * r * r);
  out.F = F.d[0];
  for (int k = 0; k < 3; k++)
  {
    out.d1[k] = f1 * x[k];
    for (int l = 0; l < 3; l++)
    {
      out.d2[k][l] = (k == l ? f1 : 0.0) + f2 * x[k] * x[l];
      for (int m = 0; m < 3; m++)
      {
        double t = f3 * x[k] * x[l] * x[m];
        if (k == l)
          t += f2 * x[m];
        if (k == m)
          t += f2 * x[l];
        if (l == m)
          t += f2 * x[k];
        out.d3[k][l][m] = t;
      }
    }
  }
  return out;
}

inline double kd(int i, int j)
{
  return i == j ? 1.0 : 0.0;
}

// m_ij = x_i x_j and its derivatives.
inline double m0(const Vec3 &x, int i, int j)
{
  return x[i] * x[j];
}
inline double m1(const Vec3 &x, int i, int j, int k)
{
  return kd(i, k) * x[j] + kd(j, k) * x[i];
}
inline double m2(int i, int j, int k, int l)
{
  return kd(i, k) * kd(j, l) + kd(j, k) * kd(i, l);
}

double parse_number(const std::string &s)
{
  std::string t;
  for (char ch : s)
    if (!std::isspace(static_cast<unsigned char>(ch)))
      t.push_back(ch);
  double v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    fail(ErrorCode::Parse, "bad number '" + s + "'");
  return v;
}

struct Call
{
  std::string name;
  std::vector<double> args;
};

std::string trim(const std::string &s)
{
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos)
    return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

// "name(a,b) + other(c)" -> calls. A term may carry "@split=s".
std::vector<std::pair<Call, std::optional<double>>> parse_calls(const std::string &src)
{
  std::vector<std::pair<Call, std::optional<double>>> out;
  std::string s = trim(src);
  if (s.empty())
    return out;
  std::size_t pos = 0;
  while (pos <= s.size())
  {
    std::size_t depth = 0, end = pos;
    for (; end < s.size(); end++)
    {
      if (s[end] == '(')
        depth++;
      else if (s[end] == ')')
        depth--;
      else if (s[end] == '+' && depth == 0 && end > pos && s[end - 1] != 'e' &&
               s[end - 1] != 'E')
        break;
    }
    std::string term = trim(s.substr(pos, end - pos));
    std::optional<double> split;
    if (auto at = term.find('@'); at != std::string::npos)
    {
      std::string opt = trim(term.substr(at + 1));
      term = trim(term.substr(0, at));
      if (opt.rfind("split=", 0) != 0)
        fail(ErrorCode::Parse, "unknown term option '" + opt + "'");
      split = parse_number(opt.substr(6));
    }
    Call c;
    auto lp = term.find('(');
    if (lp == std::string::npos)
      c.name = term;
    else
    {
      if (term.back() != ')')
        fail(ErrorCode::Parse, "missing ')' in '" + term + "'");
      c.name = trim(term.substr(0, lp));
      std::string inner = term.substr(lp + 1, term.size() - lp - 2);
      std::stringstream ss(inner);
      std::string tok;
      while (std::getline(ss, tok, ','))
        c.args.push_back(parse_number(tok));
    }
    if (c.name.empty())
      fail(ErrorCode::Parse, "empty term in '" + src + "'");
    out.emplace_back(c, split);
    if (end >= s.size())
      break;
    pos = end + 1;
  }
  return out;
}

void need_args(const Call &c, std::size_t n)
{
  if (c.args.size() != n)
    fail(ErrorCode::Parse, c.name + " expects " + std::to_string(n) + " argument(s)");
}

std::string call_name(const std::string &n, std::initializer_list<double> args)
{
  std::string s = n + "(";
  bool first = true;
  for (double a : args)
  {
    if (!first)
      s += ",";
    s += fmt_real(a);
    first = false;
  }
  return s + ")";
}

bool is_none(const std::string &s)
{
  std::string t = trim(s);
  return t.empty() || t == "none" || t == "flat" || t == "0";
}

}  // namespace

double cutoff(double r, double s)
{
  if (s <= 0)
    return 1.0;
  if (r <= 0.5 * s)
    return 1.0;
  if (r >= s)
    return 0.0;
  double t = (r - 0.5 * s) / (0.5 * s);
  return 1.0 - t * t * (3 - 2 * t);
}

double cutoff_prime(double r, double s)
{
  if (s <= 0 || r <= 0.5 * s || r >= s)
    return 0.0;
  double t = (r - 0.5 * s) / (0.5 * s);
  return -6 * t * (1 - t) / (0.5 * s);
}

// ---- metric ----

void MetricModel::profiles(double r, Jet1 &P, Jet1 &Q) const
{
  Jet1 rr = Jet1::variable(r);
  switch (kind)
  {
    case Kind::Flat:
    case Kind::Constant:
      P = Jet1::constant(1);
      Q = Jet1::constant(0);
      break;
    case Kind::LongRange:
      P = Jet1::constant(1);
      Q = p1 * (pow(1.0 + rr, -p2) * pow(rr, -2.0));
      break;
    case Kind::Radial:
    {
      Jet1 w = pow(1.0 + rr * rr, -2.0);
      P = 1.0 + p2 * (rr * rr * w);
      Q = (p1 - p2) * w;
      break;
    }
  }
}

double MetricModel::alpha_r(double r) const
{
  if (kind == Kind::Constant)
    fail(ErrorCode::InvalidArgument, "constant metric has no radial profile");
  Jet1 P, Q;
  profiles(r, P, Q);
  return P.d[0] + Q.d[0] * r * r;
}

double MetricModel::beta_r(double r) const
{
  Jet1 P, Q;
  profiles(r, P, Q);
  return P.d[0];
}

double MetricModel::alpha_r_prime(double r) const
{
  Jet1 P, Q;
  profiles(r, P, Q);
  Jet1 rr = Jet1::variable(r);
  Jet1 a = P + Q * (rr * rr);
  return a.d[1];
}

MetricModel make_metric_longrange(double kappa, double delta)
{
  MetricModel m;
  m.kind = MetricModel::Kind::LongRange;
  m.p1 = kappa;
  m.p2 = delta;
  m.name = call_name("metric_longrange", {kappa, delta});
  return m;
}

MetricModel make_metric_radial(double alpha, double beta)
{
  MetricModel m;
  m.kind = MetricModel::Kind::Radial;
  m.p1 = alpha;
  m.p2 = beta;
  m.name = call_name("metric_radial", {alpha, beta});
  return m;
}

MetricModel make_metric_constant(const Mat3 &a)
{
  MetricModel m;
  m.kind = MetricModel::Kind::Constant;
  m.constant = a;
  m.name = "constant";
  return m;
}

// ---- magnetic ----

Singularity MagneticTerm::singularity() const
{
  switch (kind)
  {
    case Kind::AharonovBohm:
      return Singularity::Axis3;
    case Kind::AbSphere:
      return Singularity::Origin;
    default:
      return Singularity::None;
  }
}

Vec3 MagneticTerm::value(const Vec3 &x) const
{
  switch (kind)
  {
    case Kind::AharonovBohm:
    {
      double r2 = x[0] * x[0] + x[1] * x[1];
      return {-C * x[1] / r2, C * x[0] / r2, 0.0};
    }
    case Kind::AbSphere:
    {
      double r2 = dot(x, x);
      return {-C * x[1] / r2, C * x[0] / r2, 0.0};
    }
    case Kind::Affine:
      return b0 + matvec(B, x);
    case Kind::Custom:
      return custom(x);
  }
  return {};
}

Mat3 MagneticTerm::jacobian(const Vec3 &x) const
{
  Mat3 J{};
  switch (kind)
  {
    case Kind::AharonovBohm:
    {
      double r2 = x[0] * x[0] + x[1] * x[1], r4 = r2 * r2;
      J[0][0] = 2 * C * x[0] * x[1] / r4;
      J[0][1] = -C * (x[0] * x[0] - x[1] * x[1]) / r4;
      J[1][0] = C * (x[1] * x[1] - x[0] * x[0]) / r4;
      J[1][1] = -2 * C * x[0] * x[1] / r4;
      break;
    }
    case Kind::AbSphere:
    {
      double r2 = dot(x, x), r4 = r2 * r2;
      for (int j = 0; j < 3; j++)
      {
        J[0][j] = -C * (kd(j, 1) / r2 - 2 * x[1] * x[j] / r4);
        J[1][j] = C * (kd(j, 0) / r2 - 2 * x[0] * x[j] / r4);
      }
      break;
    }
    case Kind::Affine:
      J = B;
      break;
    case Kind::Custom:
    {
      const double step = 1e-5 * std::max(1.0, norm(x));
      for (int j = 0; j < 3; j++)
      {
        Vec3 xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        Vec3 bp = custom(xp), bm = custom(xm);
        for (int l = 0; l < 3; l++)
          J[l][j] = (bp[l] - bm[l]) / (2 * step);
      }
      break;
    }
  }
  return J;
}

MagneticTerm make_aharonov_bohm(double C)
{
  MagneticTerm t;
  t.kind = MagneticTerm::Kind::AharonovBohm;
  t.C = C;
  t.name = call_name("aharonov_bohm", {C});
  return t;
}

MagneticTerm make_ab_sphere(double C)
{
  MagneticTerm t;
  t.kind = MagneticTerm::Kind::AbSphere;
  t.C = C;
  t.name = call_name("ab_sphere", {C});
  return t;
}

MagneticTerm make_affine_magnetic(const Vec3 &b0, const Mat3 &B)
{
  MagneticTerm t;
  t.kind = MagneticTerm::Kind::Affine;
  t.b0 = b0;
  t.B = B;
  t.name = "affine";
  return t;
}

// ---- electric ----

Singularity ElectricTerm::singularity() const
{
  switch (kind)
  {
    case Kind::Coulomb:
      return p > 0 ? Singularity::Origin : Singularity::None;
    case Kind::InverseSquare:
      return Singularity::Origin;
    default:
      return Singularity::None;
  }
}

double ElectricTerm::value(const Vec3 &x) const
{
  const double r2 = dot(x, x);
  switch (kind)
  {
    case Kind::Coulomb:
      return C * std::pow(r2, -0.5 * p);
    case Kind::InverseSquare:
      return C / r2;
    case Kind::GaussianWell:
      return -C * std::exp(-r2 / (p * p));
    case Kind::RationalWell:
    {
      double u = 1 + r2;
      return C / (u * u);
    }
    case Kind::Custom:
      return custom(x);
  }
  return 0;
}

Vec3 ElectricTerm::gradient(const Vec3 &x) const
{
  const double r2 = dot(x, x);
  double s = 0;
  switch (kind)
  {
    case Kind::Coulomb:
      s = -p * C * std::pow(r2, -0.5 * p - 1);
      break;
    case Kind::InverseSquare:
      s = -2 * C / (r2 * r2);
      break;
    case Kind::GaussianWell:
      s = 2 * C / (p * p) * std::exp(-r2 / (p * p));
      break;
    case Kind::RationalWell:
    {
      double u = 1 + r2;
      s = -4 * C / (u * u * u);
      break;
    }
    case Kind::Custom:
    {
      Vec3 g{};
      const double step = 1e-5 * std::max(1.0, std::sqrt(r2));
      for (int j = 0; j < 3; j++)
      {
        Vec3 xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        g[j] = (custom(xp) - custom(xm)) / (2 * step);
      }
      return g;
    }
  }
  return s * x;
}

ElectricTerm make_coulomb(double C, double alpha)
{
  ElectricTerm t;
  t.kind = ElectricTerm::Kind::Coulomb;
  t.C = C;
  t.p = alpha;
  t.split = 1.0;
  t.name = call_name("coulomb", {C, alpha});
  return t;
}

ElectricTerm make_inverse_square(double C)
{
  ElectricTerm t;
  t.kind = ElectricTerm::Kind::InverseSquare;
  t.C = C;
  t.split = 0.0;
  t.name = call_name("inverse_square", {C});
  return t;
}

ElectricTerm make_gaussian_well(double C, double w)
{
  if (w <= 0)
    fail(ErrorCode::InvalidArgument, "gaussian_well width must be positive");
  ElectricTerm t;
  t.kind = ElectricTerm::Kind::GaussianWell;
  t.C = C;
  t.p = w;
  t.split = 1.0;
  t.name = call_name("gaussian_well", {C, w});
  return t;
}

ElectricTerm make_rational_well(double C)
{
  ElectricTerm t;
  t.kind = ElectricTerm::Kind::RationalWell;
  t.C = C;
  t.split = 0.0;
  t.name = call_name("rational_well", {C});
  return t;
}

// ---- coefficient set ----

double CoefficientSet::nu() const
{
  if (metric.kind == MetricModel::Kind::Constant)
    return sym_eigenvalues(metric.constant)[0];
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 800; i++)
  {
    double r = std::pow(10.0, -4 + 8.0 * i / 800);
    lo = std::min({lo, metric.alpha_r(r), metric.beta_r(r)});
  }
  return lo;
}

double CoefficientSet::N() const
{
  if (metric.kind == MetricModel::Kind::Constant)
    return sym_eigenvalues(metric.constant)[2];
  double hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 800; i++)
  {
    double r = std::pow(10.0, -4 + 8.0 * i / 800);
    hi = std::max({hi, metric.alpha_r(r), metric.beta_r(r)});
  }
  return hi;
}

bool CoefficientSet::fd_fallback() const
{
  for (auto &m : magnetic)
    if (m.kind == MagneticTerm::Kind::Custom)
      return true;
  for (auto &e : electric)
    if (e.kind == ElectricTerm::Kind::Custom)
      return true;
  return false;
}

std::string CoefficientSet::describe() const
{
  std::string s = "metric=" + metric.name + ";magnetic=";
  if (magnetic.empty())
    s += "none";
  for (std::size_t i = 0; i < magnetic.size(); i++)
    s += (i ? "+" : "") + magnetic[i].name;
  s += ";electric=";
  if (electric.empty())
    s += "none";
  for (std::size_t i = 0; i < electric.size(); i++)
    s += (i ? "+" : "") + electric[i].name;
  return s;
}

MetricSample CoefficientSet::metric_at(const Vec3 &x, int order) const
{
  MetricSample s;
  if (metric.kind == MetricModel::Kind::Flat)
  {
    s.a = identity3();
    return s;
  }
  if (metric.kind == MetricModel::Kind::Constant)
  {
    s.a = metric.constant;
    return s;
  }
  const double r = norm(x);
  if (r == 0)
    fail(ErrorCode::InvalidArgument, "metric derivatives requested at the origin");
  Jet1 Pj, Qj;
  metric.profiles(r, Pj, Qj);
  RadialDerivs P = radial_derivs(Pj, x, r), Q = radial_derivs(Qj, x, r);
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++)
      s.a[i][j] = P.F * kd(i, j) + Q.F * m0(x, i, j);
  if (order < 1)
    return s;
  for (int k = 0; k < 3; k++)
    for (int i = 0; i < 3; i++)
      for (int j = 0; j < 3; j++)
        s.d1[k][i][j] = P.d1[k] * kd(i, j) + Q.d1[k] * m0(x, i, j) + Q.F * m1(x, i, j, k);
  if (order < 2)
    return s;
  for (int k = 0; k < 3; k++)
    for (int l = 0; l < 3; l++)
      for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++)
          s.d2[k][l][i][j] = P.d2[k][l] * kd(i, j) + Q.d2[k][l] * m0(x, i, j) +
                             Q.d1[k] * m1(x, i, j, l) + Q.d1[l] * m1(x, i, j, k) +
                             Q.F * m2(i, j, k, l);
  if (order < 3)
    return s;
  for (int k = 0; k < 3; k++)
    for (int l = 0; l < 3; l++)
      for (int m = 0; m < 3; m++)
        for (int i = 0; i < 3; i++)
          for (int j = 0; j < 3; j++)
            s.d3[k][l][m][i][j] =
                P.d3[k][l][m] * kd(i, j) + Q.d3[k][l][m] * m0(x, i, j) +
                Q.d2[k][l] * m1(x, i, j, m) + Q.d2[k][m] * m1(x, i, j, l) +
                Q.d2[l][m] * m1(x, i, j, k) + Q.d1[k] * m2(i, j, l, m) +
                Q.d1[l] * m2(i, j, k, m) + Q.d1[m] * m2(i, j, k, l);
  return s;
}

Mat3 CoefficientSet::a(const Vec3 &x) const
{
  return metric_at(x, 0).a;
}

Vec3 CoefficientSet::b_split(const Vec3 &x, int part) const
{
  Vec3 out{};
  for (auto &t : magnetic)
  {
    Vec3 v = t.value(x);
    double w = 1.0;
    if (part != 0)
    {
      double chi = cutoff(norm(x), t.split);
      w = part == 1 ? chi : 1.0 - chi;
    }
    out = out + w * v;
  }
  return out;
}

Mat3 CoefficientSet::db_split(const Vec3 &x, int part) const
{
  Mat3 out{};
  const double r = norm(x);
  for (auto &t : magnetic)
  {
    Mat3 J = t.jacobian(x);
    double w = 1.0, wp = 0.0;
    Vec3 bv{};
    if (part != 0)
    {
      double chi = cutoff(r, t.split), chip = cutoff_prime(r, t.split);
      w = part == 1 ? chi : 1.0 - chi;
      wp = part == 1 ? chip : -chip;
      if (wp != 0)
        bv = t.value(x);
    }
    for (int l = 0; l < 3; l++)
      for (int j = 0; j < 3; j++)
        out[l][j] += w * J[l][j] + (wp != 0 ? bv[l] * wp * x[j] / r : 0.0);
  }
  return out;
}

double CoefficientSet::c_split(const Vec3 &x, int part) const
{
  double out = 0;
  for (auto &t : electric)
  {
    double v = t.value(x);
    if (part != 0)
    {
      double chi = cutoff(norm(x), t.split);
      v *= part == 1 ? chi : 1.0 - chi;
    }
    out += v;
  }
  return out;
}

Vec3 CoefficientSet::gc_split(const Vec3 &x, int part) const
{
  Vec3 out{};
  const double r = norm(x);
  for (auto &t : electric)
  {
    Vec3 g = t.gradient(x);
    if (part != 0)
    {
      double chi = cutoff(r, t.split), chip = cutoff_prime(r, t.split);
      double w = part == 1 ? chi : 1.0 - chi, wp = part == 1 ? chip : -chip;
      g = w * g;
      if (wp != 0)
        g = g + (t.value(x) * wp / r) * x;
    }
    out = out + g;
  }
  return out;
}

Vec3 CoefficientSet::b(const Vec3 &x) const { return b_split(x, 0); }
Vec3 CoefficientSet::b_short(const Vec3 &x) const { return b_split(x, 1); }
Vec3 CoefficientSet::b_long(const Vec3 &x) const { return b_split(x, 2); }
Mat3 CoefficientSet::db(const Vec3 &x) const { return db_split(x, 0); }
Mat3 CoefficientSet::db_short(const Vec3 &x) const { return db_split(x, 1); }
Mat3 CoefficientSet::db_long(const Vec3 &x) const { return db_split(x, 2); }
double CoefficientSet::c(const Vec3 &x) const { return c_split(x, 0); }
double CoefficientSet::c_short(const Vec3 &x) const { return c_split(x, 1); }
double CoefficientSet::c_long(const Vec3 &x) const { return c_split(x, 2); }
Vec3 CoefficientSet::grad_c(const Vec3 &x) const { return gc_split(x, 0); }
Vec3 CoefficientSet::grad_c_short(const Vec3 &x) const { return gc_split(x, 1); }
Vec3 CoefficientSet::grad_c_long(const Vec3 &x) const { return gc_split(x, 2); }

double CoefficientSet::singular_distance(const Vec3 &x) const
{
  double d = std::numeric_limits<double>::infinity();
  auto upd = [&](Singularity s) {
    if (s == Singularity::Origin)
      d = std::min(d, norm(x));
    else if (s == Singularity::Axis3)
      d = std::min(d, std::hypot(x[0], x[1]));
  };
  for (auto &t : magnetic)
    upd(t.singularity());
  for (auto &t : electric)
    upd(t.singularity());
  if (metric.singular_at_origin())
    upd(Singularity::Origin);
  return d;
}

Vec3 CoefficientSet::project(const Vec3 &x, Singularity s, double rc)
{
  if (s == Singularity::Origin)
  {
    double r = norm(x);
    if (r >= rc)
      return x;
    if (r == 0)
      return {rc, 0, 0};
    return (rc / r) * x;
  }
  if (s == Singularity::Axis3)
  {
    double rho = std::hypot(x[0], x[1]);
    if (rho >= rc)
      return x;
    if (rho == 0)
      return {rc, 0, x[2]};
    return {x[0] * rc / rho, x[1] * rc / rho, x[2]};
  }
  return x;
}

double CoefficientSet::c_clamped(const Vec3 &x, double rc) const
{
  double out = 0;
  for (auto &t : electric)
    out += t.value(project(x, t.singularity(), rc));
  return out;
}

Vec3 CoefficientSet::b_clamped(const Vec3 &x, double rc) const
{
  Vec3 out{};
  for (auto &t : magnetic)
    out = out + t.value(project(x, t.singularity(), rc));
  return out;
}

Mat3 CoefficientSet::db_clamped(const Vec3 &x, double rc) const
{
  Mat3 out{};
  for (auto &t : magnetic)
  {
    const Mat3 J = t.jacobian(project(x, t.singularity(), rc));
    for (int i = 0; i < 3; i++)
      for (int j = 0; j < 3; j++)
        out[i][j] += J[i][j];
  }
  return out;
}

Vec3 CoefficientSet::metric_point(const Vec3 &x, double rc) const
{
  if (metric.kind == MetricModel::Kind::Flat || metric.kind == MetricModel::Kind::Constant)
    return x;
  return project(x, Singularity::Origin, rc);
}

MetricJets CoefficientSet::metric_jets(const Vec3 &x) const
{
  MetricJets out;
  const MetricSample s = metric_at(x, 3);
  Jet2 X[3] = {Jet2::coord(x, 0), Jet2::coord(x, 1), Jet2::coord(x, 2)};
  Jet2 r2 = X[0] * X[0] + X[1] * X[1] + X[2] * X[2];
  Jet2 r = sqrt(r2);
  Jet2 quad, abar, div;
  for (int l = 0; l < 3; l++)
  {
    for (int m = 0; m < 3; m++)
    {
      Jet2 alm;
      alm.v = s.a[l][m];
      for (int k = 0; k < 3; k++)
      {
        alm.g[k] = s.d1[k][l][m];
        for (int j = 0; j < 3; j++)
          alm.H[k][j] = s.d2[k][j][l][m];
      }
      quad = quad + alm * X[l] * X[m];
      if (l == m)
        abar = abar + alm;
      // d_l a_lm as a jet
      Jet2 dlm;
      dlm.v = s.d1[l][l][m];
      for (int k = 0; k < 3; k++)
      {
        dlm.g[k] = s.d2[k][l][l][m];
        for (int j = 0; j < 3; j++)
          dlm.H[k][j] = s.d3[k][j][l][l][m];
      }
      div = div + dlm * X[m];
    }
  }
  out.ahat = quad / r2;
  out.abar = abar;
  out.atil = div / r;
  return out;
}

DerivedScalars derived_metric_scalars(const CoefficientSet &cs, const Vec3 &x)
{
  const double r = norm(x);
  if (r == 0)
    fail(ErrorCode::InvalidArgument, "derived_metric_scalars: zero point");
  const MetricSample s = cs.metric_at(x, 1);
  Vec3 xh = (1.0 / r) * x;
  DerivedScalars d{0, 0, 0};
  for (int l = 0; l < 3; l++)
  {
    d.abar += s.a[l][l];
    for (int m = 0; m < 3; m++)
    {
      d.ahat += s.a[l][m] * xh[l] * xh[m];
      d.atil += s.d1[l][l][m] * xh[m];
    }
  }
  return d;
}

double radial_A_psi(const CoefficientSet &cs, const Vec3 &x, double psi1, double psi2)
{
  const double r = norm(x);
  if (r == 0)
    fail(ErrorCode::InvalidArgument, "radial_A_psi: zero point");
  DerivedScalars d = derived_metric_scalars(cs, x);
  return d.ahat * psi2 + (d.abar - d.ahat) * psi1 / r + d.atil * psi1;
}

Vec3 tangential_field(const CoefficientSet &cs, const Vec3 &x, Part part)
{
  const double r = norm(x);
  if (r == 0)
    fail(ErrorCode::InvalidArgument, "tangential_field: zero point");
  Mat3 J = part == Part::Full ? cs.db(x) : part == Part::Short ? cs.db_short(x) : cs.db_long(x);
  Vec3 w = matvec(cs.a(x), (1.0 / r) * x);
  Vec3 out{};
  // (db)_{jl} = d_j b_l - d_l b_j, with J[l][j] = d_j b_l
  for (int j = 0; j < 3; j++)
    for (int l = 0; l < 3; l++)
      out[j] += (J[l][j] - J[j][l]) * w[l];
  return out;
}

MetricModel parse_metric(const std::string &s)
{
  if (is_none(s))
    return MetricModel{};
  auto calls = parse_calls(s);
  if (calls.size() != 1)
    fail(ErrorCode::Parse, "metric must be a single library entry: '" + s + "'");
  const Call &c = calls[0].first;
  if (c.name == "metric_longrange")
  {
    need_args(c, 2);
    return make_metric_longrange(c.args[0], c.args[1]);
  }
  if (c.name == "metric_radial")
  {
    need_args(c, 2);
    return make_metric_radial(c.args[0], c.args[1]);
  }
  fail(ErrorCode::Parse, "unknown metric '" + c.name + "'");
}

std::vector<MagneticTerm> parse_magnetic(const std::string &s)
{
  std::vector<MagneticTerm> out;
  if (is_none(s))
    return out;
  for (auto &[c, split] : parse_calls(s))
  {
    MagneticTerm t;
    if (c.name == "aharonov_bohm")
    {
      need_args(c, 1);
      t = make_aharonov_bohm(c.args[0]);
    }
    else if (c.name == "ab_sphere")
    {
      need_args(c, 1);
      t = make_ab_sphere(c.args[0]);
    }
    else if (c.name == "constant_field")
    {
      // b = (b1,b2,b3): pure gauge, used for covariance checks
      need_args(c, 3);
      t = make_affine_magnetic({c.args[0], c.args[1], c.args[2]}, Mat3{});
      t.name = call_name("constant_field", {c.args[0], c.args[1], c.args[2]});
    }
    else
      fail(ErrorCode::Parse, "unknown magnetic potential '" + c.name + "'");
    if (split)
    {
      t.split = *split;
      t.name += "@split=" + fmt_real(*split);
    }
    out.push_back(t);
  }
  return out;
}

std::vector<ElectricTerm> parse_electric(const std::string &s)
{
  std::vector<ElectricTerm> out;
  if (is_none(s))
    return out;
  for (auto &[c, split] : parse_calls(s))
  {
    ElectricTerm t;
    if (c.name == "coulomb")
    {
      need_args(c, 2);
      t = make_coulomb(c.args[0], c.args[1]);
    }
    else if (c.name == "inverse_square")
    {
      need_args(c, 1);
      t = make_inverse_square(c.args[0]);
    }
    else if (c.name == "gaussian_well")
    {
      need_args(c, 2);
      t = make_gaussian_well(c.args[0], c.args[1]);
    }
    else if (c.name == "rational_well")
    {
      need_args(c, 1);
      t = make_rational_well(c.args[0]);
    }
    else
      fail(ErrorCode::Parse, "unknown electric potential '" + c.name + "'");
    if (split)
    {
      t.split = *split;
      t.name += "@split=" + fmt_real(*split);
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace lapkit
