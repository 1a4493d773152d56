// SPDX-License-Identifier: Apache-2.0
#include "geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <limits>
#include <numbers>
#include <sstream>

namespace lapkit
{

namespace
{

std::vector<double> parse_list(const std::string &s, const std::string &what)
{
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
  {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || tok.empty())
      fail(ErrorCode::Parse, "bad number in " + what + ": '" + s + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

bool Obstacle::contains(const Vec3 &x) const
{
  return kind != Kind::None && level(x) <= 1e-12;
}

double Obstacle::level(const Vec3 &x) const
{
  Vec3 d = x - center;
  switch (kind)
  {
    case Kind::None:
      return std::numeric_limits<double>::infinity();
    case Kind::Ball:
      return norm(d) - axes[0];
    case Kind::Ellipsoid:
    {
      double s = 0;
      for (int i = 0; i < 3; i++)
        s += (d[i] / axes[i]) * (d[i] / axes[i]);
      return std::sqrt(s) - 1.0;
    }
  }
  return 0;
}

Vec3 Obstacle::boundary_point(double theta, double phi) const
{
  Vec3 u{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
  if (kind == Kind::Ball)
    return center + axes[0] * u;
  return center + Vec3{axes[0] * u[0], axes[1] * u[1], axes[2] * u[2]};
}

Vec3 Obstacle::domain_normal(const Vec3 &p) const
{
  Vec3 d = p - center;
  Vec3 g = d;
  if (kind == Kind::Ellipsoid)
    for (int i = 0; i < 3; i++)
      g[i] = d[i] / (axes[i] * axes[i]);
  double n = norm(g);
  return (-1.0 / n) * g;
}

double Obstacle::max_radius() const
{
  if (kind == Kind::None)
    return 0;
  double a = kind == Kind::Ball ? axes[0] : std::max({axes[0], axes[1], axes[2]});
  return norm(center) + a;
}

double Obstacle::max_inf_norm() const
{
  if (kind == Kind::None)
    return 0;
  double m = 0;
  for (int i = 0; i < 3; i++)
    m = std::max(m, std::abs(center[i]) + (kind == Kind::Ball ? axes[0] : axes[i]));
  return m;
}

double Obstacle::min_radius() const
{
  if (kind == Kind::None)
    return 0;
  double a = kind == Kind::Ball ? axes[0] : std::min({axes[0], axes[1], axes[2]});
  return std::max(0.0, a - norm(center));
}

std::string Obstacle::describe() const
{
  std::string s;
  switch (kind)
  {
    case Kind::None:
      return "none";
    case Kind::Ball:
      s = "ball:" + fmt_real(axes[0]);
      break;
    case Kind::Ellipsoid:
      s = "ellipsoid:" + fmt_real(axes[0]) + "," + fmt_real(axes[1]) + "," + fmt_real(axes[2]);
      break;
  }
  if (center[0] != 0 || center[1] != 0 || center[2] != 0)
    s += "@" + fmt_real(center[0]) + "," + fmt_real(center[1]) + "," + fmt_real(center[2]);
  return s;
}

Obstacle parse_obstacle(const std::string &src)
{
  Obstacle ob;
  std::string s = src;
  s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
  if (s.empty() || s == "none")
    return ob;
  std::string body = s;
  if (auto at = s.find('@'); at != std::string::npos)
  {
    auto c = parse_list(s.substr(at + 1), "obstacle center");
    if (c.size() != 3)
      fail(ErrorCode::Parse, "obstacle center needs 3 coordinates");
    ob.center = {c[0], c[1], c[2]};
    body = s.substr(0, at);
  }
  auto colon = body.find(':');
  if (colon == std::string::npos)
    fail(ErrorCode::Parse, "bad obstacle '" + src + "'");
  std::string kind = body.substr(0, colon);
  auto args = parse_list(body.substr(colon + 1), "obstacle");
  if (kind == "ball")
  {
    if (args.size() != 1 || args[0] <= 0)
      fail(ErrorCode::Parse, "ball obstacle needs one positive radius");
    ob.kind = Obstacle::Kind::Ball;
    ob.axes = {args[0], args[0], args[0]};
  }
  else if (kind == "ellipsoid")
  {
    if (args.size() != 3 || args[0] <= 0 || args[1] <= 0 || args[2] <= 0)
      fail(ErrorCode::Parse, "ellipsoid obstacle needs three positive semi-axes");
    ob.kind = Obstacle::Kind::Ellipsoid;
    ob.axes = {args[0], args[1], args[2]};
  }
  else
    fail(ErrorCode::Parse, "unknown obstacle kind '" + kind + "'");
  return ob;
}

int shell_of(double r)
{
  int e = 0;
  std::frexp(r, &e);  // r = m 2^e with m in [0.5, 1)
  return e - 1;
}

std::vector<cplx> Grid::gather(const Field &f) const
{
  std::vector<cplx> u(num_unknowns());
  for (std::size_t q = 0; q < u.size(); q++)
    u[q] = f[node_of[q]];
  return u;
}

Field Grid::scatter(const std::vector<cplx> &u) const
{
  Field f(num_nodes(), cplx(0));
  for (std::size_t q = 0; q < u.size(); q++)
    f[node_of[q]] = u[q];
  return f;
}

Grid build_grid(const GridConfig &cfg)
{
  if (!(cfg.h > 0) || !std::isfinite(cfg.h))
    fail(ErrorCode::Geometry, "grid.h must be positive");
  const int pop_lo = shell_of(cfg.h);
  const int pop_hi = cfg.rmax > cfg.h ? shell_of(std::nextafter(cfg.rmax, 0.0)) : pop_lo;
  if (pop_hi - pop_lo + 1 < 3)
    fail(ErrorCode::Geometry, "fewer than 3 shells representable");
  if (!(cfg.rmax >= 8 * cfg.h))
    fail(ErrorCode::Geometry, "grid.rmax must be at least 8 h");
  if (cfg.sponge_width < 0 || cfg.sponge_width >= cfg.rmax)
    fail(ErrorCode::Geometry, "grid.sponge_width out of range");
  Grid g;
  g.cfg = cfg;
  g.M = int(std::lround(cfg.rmax / cfg.h));
  if (std::abs(g.M * cfg.h - cfg.rmax) > 1e-9 * cfg.rmax)
    fail(ErrorCode::Geometry, "grid.rmax must be an integer multiple of grid.h");
  g.n = 2 * g.M + 1;

  g.populated_lo = pop_lo;
  g.populated_hi = pop_hi;
  g.shell_lo = pop_lo;
  while (std::ldexp(1.0, g.shell_lo) < 2 * cfg.h - 1e-12)
    g.shell_lo++;
  g.shell_hi = shell_of(std::nextafter(g.presponge(), 0.0));

  if (!cfg.obstacle.empty() && cfg.obstacle.max_inf_norm() >= g.presponge() - 1e-12)
    fail(ErrorCode::Geometry, "obstacle touches the sponge layer or the outer boundary");

  const std::size_t N = g.num_nodes();
  g.cls.assign(N, NodeClass::Interior);
  g.unknown.assign(N, -1);
  const double tol = 1e-12 * cfg.rmax;
  for (int i = 0; i < g.n; i++)
    for (int j = 0; j < g.n; j++)
      for (int k = 0; k < g.n; k++)
      {
        std::size_t idx = g.index(i, j, k);
        int mi = std::max({std::abs(i - g.M), std::abs(j - g.M), std::abs(k - g.M)});
        Vec3 x = g.x(i, j, k);
        NodeClass c;
        if (mi == g.M)
          c = NodeClass::Outer;
        else if (cfg.obstacle.contains(x))
          c = NodeClass::Obstacle;
        else if (cfg.sponge_width > 0 && mi * cfg.h >= g.presponge() - tol)
          c = NodeClass::Sponge;
        else if (mi == 0)
          c = NodeClass::Origin;
        else
          c = NodeClass::Interior;
        g.cls[idx] = c;
        g.count[int(c)]++;
        if (c != NodeClass::Outer && c != NodeClass::Obstacle)
        {
          g.unknown[idx] = int(g.node_of.size());
          g.node_of.push_back(idx);
        }
      }
  if (!cfg.obstacle.empty() && g.count[int(NodeClass::Obstacle)] == 0)
    fail(ErrorCode::Geometry, "obstacle contains no grid node; refine the grid");
  return g;
}

StarshapedResult starshaped_check(const CoefficientSet &cs, const Obstacle &ob, int samples)
{
  StarshapedResult res;
  if (ob.empty())
  {
    res.note = "no obstacle";
    return res;
  }
  res.worst_value = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < samples; it++)
  {
    double theta = std::numbers::pi * (it + 0.5) / samples;
    for (int ip = 0; ip < 2 * samples; ip++)
    {
      double phi = std::numbers::pi * ip / samples;
      Vec3 p = ob.boundary_point(theta, phi);
      Vec3 nu = ob.domain_normal(p);
      double v = dot(matvec(cs.a(cs.metric_point(p, 1e-8)), p), nu);
      if (v > res.worst_value)
      {
        res.worst_value = v;
        res.worst_point = p;
      }
    }
  }
  res.ok = res.worst_value <= 1e-10;
  return res;
}

void gauss_legendre(int n, std::vector<double> &x, std::vector<double> &w)
{
  // Golub-Welsch on the Jacobi matrix, then one Newton polish per node.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; k++)
  {
    double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; i++)
  {
    double t = es.eigenvalues()(i);
    for (int it = 0; it < 3; it++)
    {
      double p0 = 1, p1 = t;
      for (int k = 2; k <= n; k++)
      {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = n == 1 ? t : p1, pm = n == 1 ? 1 : p0;
      double dp = n * (t * pn - pm) / (t * t - 1);
      t -= pn / dp;
    }
    double p0 = 1, p1 = t;
    for (int k = 2; k <= n; k++)
    {
      double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double pn = n == 1 ? t : p1, pm = n == 1 ? 1 : p0;
    double dp = n * (t * pn - pm) / (t * t - 1);
    x[i] = t;
    w[i] = 2.0 / ((1 - t * t) * dp * dp);
  }
}

SphereQuadrature SphereQuadrature::build(const Grid *grid, double R, int degree, Vec3 center)
{
  if (!(R > 0))
    fail(ErrorCode::Geometry, "sphere radius must be positive");
  if (grid && norm(center) + R > grid->presponge())
    fail(ErrorCode::Geometry, "sphere reaches the sponge layer");
  SphereQuadrature q;
  q.R = R;
  q.center = center;
  int nt = ntheta_for_degree(std::max(degree, 1));
  int np = 2 * nt;
  std::vector<double> ct, wt;
  gauss_legendre(nt, ct, wt);
  for (int i = 0; i < nt; i++)
  {
    double st = std::sqrt(std::max(0.0, 1 - ct[i] * ct[i]));
    for (int j = 0; j < np; j++)
    {
      double phi = 2 * std::numbers::pi * (j + 0.5) / np;
      Vec3 p = center + R * Vec3{st * std::cos(phi), st * std::sin(phi), ct[i]};
      if (grid && grid->cfg.obstacle.contains(p))
      {
        q.clipped = true;
        continue;
      }
      q.points.push_back(p);
      q.weights.push_back(R * R * wt[i] * 2 * std::numbers::pi / np);
    }
  }
  return q;
}

double SphereQuadrature::area() const
{
  double s = 0;
  for (double w : weights)
    s += w;
  return s;
}

Interpolant interpolant(const Grid &g, const Vec3 &x)
{
  Interpolant it{};
  int base[3];
  double t[3];
  for (int d = 0; d < 3; d++)
  {
    double s = (x[d] + g.cfg.rmax) / g.cfg.h;
    int b = int(std::floor(s));
    b = std::clamp(b, 0, g.n - 2);
    base[d] = b;
    t[d] = s - b;
  }
  int q = 0;
  for (int a = 0; a < 2; a++)
    for (int b = 0; b < 2; b++)
      for (int c = 0; c < 2; c++)
      {
        it.idx[q] = g.index(base[0] + a, base[1] + b, base[2] + c);
        it.w[q] = (a ? t[0] : 1 - t[0]) * (b ? t[1] : 1 - t[1]) * (c ? t[2] : 1 - t[2]);
        q++;
      }
  return it;
}

cplx interpolate(const Grid &g, const Field &f, const Vec3 &x)
{
  Interpolant it = interpolant(g, x);
  cplx s = 0;
  for (int q = 0; q < 8; q++)
    s += it.w[q] * f[it.idx[q]];
  return s;
}

}  // namespace lapkit
