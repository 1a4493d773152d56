// SPDX-License-Identifier: Apache-2.0
#include "norms.hpp"

#include <algorithm>
#include <cmath>

namespace lapkit
{

CVec3 GradientField::radial(const CVec3 &w, const Vec3 &xhat)
{
  cplx s = w[0] * xhat[0] + w[1] * xhat[1] + w[2] * xhat[2];
  return {s * xhat[0], s * xhat[1], s * xhat[2]};
}

CVec3 GradientField::tangential(const CVec3 &w, const Vec3 &xhat)
{
  CVec3 r = radial(w, xhat);
  return {w[0] - r[0], w[1] - r[1], w[2] - r[2]};
}

CVec3 GradientField::metric_image(const Mat3 &a, const CVec3 &w)
{
  CVec3 r{};
  for (int i = 0; i < 3; i++)
    r[i] = a[i][0] * w[0] + a[i][1] * w[1] + a[i][2] * w[2];
  return r;
}

GradientField magnetic_gradient(const Field &v, const CoefficientSet &cs, const Grid &g)
{
  if (v.size() != g.num_nodes())
    fail(ErrorCode::InvalidArgument, "magnetic_gradient: field size does not match the grid");
  GradientField out;
  out.g.assign(g.num_nodes(), CVec3{});
  const double h = g.h(), rc = 0.5 * h;
  const bool magnetic = cs.has_magnetic();
  const std::size_t stride[3] = {std::size_t(g.n) * g.n, std::size_t(g.n), 1};
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.is_unknown(node))
      continue;
    int P[3];
    g.ijk(node, P[0], P[1], P[2]);
    CVec3 d{};
    for (int k = 0; k < 3; k++)
    {
      const std::size_t up = node + stride[k], dn = node - stride[k];
      const bool has_up = g.is_unknown(up), has_dn = g.is_unknown(dn);
      if (has_up && has_dn)
        d[k] = (v[up] - v[dn]) / (2 * h);
      else if (has_dn)
      {
        // the Dirichlet neighbour sits on the boundary: use it as a zero value
        // when it is the obstacle, else fall back to one-sided interior data
        const std::size_t dn2 = node - 2 * stride[k];
        if (P[k] >= 2 && g.is_unknown(dn2))
          d[k] = (3.0 * v[node] - 4.0 * v[dn] + v[dn2]) / (2 * h);
        else
          d[k] = (v[node] - v[dn]) / h;
      }
      else if (has_up)
      {
        const std::size_t up2 = node + 2 * stride[k];
        if (P[k] + 2 < g.n && g.is_unknown(up2))
          d[k] = (-3.0 * v[node] + 4.0 * v[up] - v[up2]) / (2 * h);
        else
          d[k] = (v[up] - v[node]) / h;
      }
    }
    if (magnetic)
    {
      const Vec3 b = cs.b_clamped(g.x(node), rc);
      for (int k = 0; k < 3; k++)
        d[k] += cplx(0, b[k]) * v[node];
    }
    out.g[node] = d;
  }
  return out;
}

RealField magnitude(const Field &v)
{
  RealField m(v.size());
  for (std::size_t i = 0; i < v.size(); i++)
    m[i] = std::abs(v[i]);
  return m;
}

RealField magnitude(const GradientField &w)
{
  RealField m(w.g.size());
  for (std::size_t i = 0; i < w.g.size(); i++)
    m[i] = std::sqrt(GradientField::sq(w.g[i]));
  return m;
}

namespace
{

// Squared radius in units of h^2 (exact integer on the lattice).
long radius_sq_index(const Grid &g, std::size_t node)
{
  int i, j, k;
  g.ijk(node, i, j, k);
  long a = i - g.M, b = j - g.M, c = k - g.M;
  return a * a + b * b + c * c;
}

// Shell index of a domain node, or a sentinel outside [shell_lo, shell_hi].
int node_shell(const Grid &g, std::size_t node)
{
  if (!g.in_domain(node) || g.cls[node] == NodeClass::Origin)
    return INT32_MIN;
  int s = shell_of(norm(g.x(node)));
  return (s < g.shell_lo || s > g.shell_hi) ? INT32_MIN : s;
}

double lp_combine(const std::vector<double> &vals, double p)
{
  if (std::isinf(p))
  {
    double m = 0;
    for (double v : vals)
      m = std::max(m, v);
    return m;
  }
  std::vector<double> t(vals.size());
  for (std::size_t i = 0; i < vals.size(); i++)
    t[i] = std::pow(vals[i], p);
  return std::pow(pairwise_sum(t.data(), t.size()), 1.0 / p);
}

void check_exponent(double p)
{
  if (!(p == 1 || p == 2 || std::isinf(p)))
    fail(ErrorCode::InvalidArgument, "dyadic exponents must be 1, 2 or inf");
}

}  // namespace

std::vector<double> dyadic_radii(const Grid &g)
{
  std::vector<double> r;
  for (int j = g.shell_lo; j <= g.shell_hi + 1; j++)
  {
    double R = std::ldexp(1.0, j);
    if (R >= 2 * g.h() - 1e-12 && R <= g.max_sphere_radius())
      r.push_back(R);
  }
  return r;
}

double sphere_integral(const Grid &g, const SphereQuadrature &sq, const RealField &q)
{
  std::vector<double> t(sq.points.size());
  for (std::size_t i = 0; i < sq.points.size(); i++)
  {
    Interpolant it = interpolant(g, sq.points[i]);
    double s = 0;
    for (int c = 0; c < 8; c++)
      s += it.w[c] * q[it.idx[c]];
    t[i] = sq.weights[i] * s;
  }
  return pairwise_sum(t.data(), t.size());
}

double sphere_integral_field(const Grid &g, const SphereQuadrature &sq, const Field &v,
                             double power)
{
  std::vector<double> t(sq.points.size());
  for (std::size_t i = 0; i < sq.points.size(); i++)
    t[i] = sq.weights[i] * std::pow(std::abs(interpolate(g, v, sq.points[i])), power);
  return pairwise_sum(t.data(), t.size());
}

double dyadic_norm(const Grid &g, const RealField &mag, double p, double q, double r,
                   double weight_exp, int quad_degree, DyadicInfo *info)
{
  check_exponent(p);
  check_exponent(q);
  check_exponent(r);
  if (mag.size() != g.num_nodes())
    fail(ErrorCode::InvalidArgument, "dyadic_norm: field size does not match the grid");
  const int nsh = g.shell_hi - g.shell_lo + 1;
  std::vector<double> shell(nsh, 0.0);
  const double h = g.h(), h3 = h * h * h;
  const bool node_rule = q == r;

  if (node_rule)
  {
    std::vector<std::vector<double>> terms(nsh);
    for (std::size_t node = 0; node < g.num_nodes(); node++)
    {
      int s = node_shell(g, node);
      if (s == INT32_MIN)
        continue;
      double val = mag[node] * std::pow(norm(g.x(node)), weight_exp);
      if (std::isinf(q))
        shell[s - g.shell_lo] = std::max(shell[s - g.shell_lo], val);
      else
        terms[s - g.shell_lo].push_back(std::pow(val, q) * h3);
    }
    if (!std::isinf(q))
      for (int s = 0; s < nsh; s++)
        shell[s] = std::pow(pairwise_sum(terms[s].data(), terms[s].size()), 1.0 / q);
  }
  else
  {
    // Radial bins of width h; the sphere L^r norm at each bin centre.
    for (int s = 0; s < nsh; s++)
    {
      const double r0 = std::ldexp(1.0, g.shell_lo + s);
      const double r1 = std::min(2 * r0, g.max_sphere_radius());
      if (r1 <= r0)
        continue;
      const int nb = std::max(1, int(std::ceil((r1 - r0) / h - 1e-9)));
      const double dr = (r1 - r0) / nb;
      std::vector<double> radial(nb);
      for (int b = 0; b < nb; b++)
      {
        const double rho = r0 + (b + 0.5) * dr;
        auto sq = SphereQuadrature::build(&g, rho, quad_degree);
        const double wgt = std::pow(rho, weight_exp);
        std::vector<double> vals(sq.points.size());
        for (std::size_t i = 0; i < sq.points.size(); i++)
        {
          Interpolant it = interpolant(g, sq.points[i]);
          double m = 0;
          for (int c = 0; c < 8; c++)
            m += it.w[c] * mag[it.idx[c]];
          vals[i] = wgt * m;
        }
        if (std::isinf(r))
          radial[b] = vals.empty() ? 0 : *std::max_element(vals.begin(), vals.end());
        else
        {
          std::vector<double> t(vals.size());
          for (std::size_t i = 0; i < vals.size(); i++)
            t[i] = sq.weights[i] * std::pow(vals[i], r);
          radial[b] = std::pow(pairwise_sum(t.data(), t.size()), 1.0 / r);
        }
      }
      if (std::isinf(q))
        shell[s] = *std::max_element(radial.begin(), radial.end());
      else
      {
        std::vector<double> t(nb);
        for (int b = 0; b < nb; b++)
          t[b] = std::pow(radial[b], q) * dr;
        shell[s] = std::pow(pairwise_sum(t.data(), t.size()), 1.0 / q);
      }
    }
  }
  if (info)
  {
    info->j_min = g.shell_lo;
    info->j_max = g.shell_hi;
    info->shell_values = shell;
    info->used_quadrature = !node_rule;
  }
  return lp_combine(shell, p);
}

double ydot_norm(const Grid &g, const RealField &mag)
{
  // Mass per integer squared radius, then cumulative ball integrals.
  long smax = 3L * g.M * g.M;
  std::vector<double> bucket(smax + 1, 0.0);
  const double h = g.h(), h3 = h * h * h;
  for (std::size_t node = 0; node < g.num_nodes(); node++)
    if (g.in_domain(node))
      bucket[radius_sq_index(g, node)] += mag[node] * mag[node] * h3;
  std::vector<double> cum(smax + 2, 0.0);
  for (long s = 0; s <= smax; s++)
    cum[s + 1] = cum[s] + bucket[s];
  // ball |x| < R  <=>  s h^2 < R^2
  auto ball = [&](double R) {
    double lim = R * R / (h * h);
    long s = long(std::ceil(lim - 1e-9));
    s = std::clamp(s, 0L, smax + 1);
    return cum[s];
  };
  const double Rtop = std::ldexp(1.0, g.shell_hi + 1);
  double best = 0;
  for (int m = 2; m * h <= Rtop + 1e-12; m++)
    best = std::max(best, ball(m * h) / (m * h));
  for (int j = g.shell_lo; j <= g.shell_hi + 1; j++)
  {
    double R = std::ldexp(1.0, j);
    best = std::max(best, ball(R) / R);
  }
  return std::sqrt(best);
}

double xdot_norm(const Grid &g, const Field &v, int quad_degree)
{
  const double h = g.h();
  std::vector<double> radii;
  for (int m = 2; m * h <= g.max_sphere_radius() + 1e-12; m++)
    radii.push_back(m * h);
  for (double R : dyadic_radii(g))
    radii.push_back(R);
  double best = 0;
  for (double R : radii)
  {
    auto sq = SphereQuadrature::build(&g, R, quad_degree);
    best = std::max(best, sphere_integral_field(g, sq, v) / (R * R));
  }
  return std::sqrt(best);
}

double ystar_norm(const Grid &g, const RealField &mag)
{
  DyadicInfo info;
  dyadic_norm(g, mag, 1, 2, 2, 0, 0, &info);
  std::vector<double> t(info.shell_values.size());
  for (std::size_t s = 0; s < t.size(); s++)
    t[s] = std::sqrt(std::ldexp(1.0, g.shell_lo + int(s) + 1)) * info.shell_values[s];
  return pairwise_sum(t.data(), t.size());
}

double weighted_l2(const Grid &g, const RealField &mag, double weight_exp)
{
  const double h = g.h(), h3 = h * h * h;
  std::vector<double> t;
  t.reserve(g.num_unknowns());
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.in_domain(node))
      continue;
    if (g.cls[node] == NodeClass::Origin && weight_exp < 0)
      continue;
    double r = norm(g.x(node));
    double w = weight_exp == 0 ? 1.0 : std::pow(r, weight_exp);
    t.push_back(w * w * mag[node] * mag[node] * h3);
  }
  return std::sqrt(pairwise_sum(t.data(), t.size()));
}

NormReport norm_report(const Field &v, const Field &f, const CoefficientSet &cs, const Grid &g,
                       double lambda, double eps, int quad_degree)
{
  if (v.size() != g.num_nodes() || f.size() != g.num_nodes())
    fail(ErrorCode::InvalidArgument, "norm_report: fields must live on the same grid");
  NormReport rep;
  rep.lambda = lambda;
  rep.eps = eps;
  rep.j_min = g.shell_lo;
  rep.j_max = g.shell_hi;
  const RealField vm = magnitude(v), fm = magnitude(f);
  const GradientField gv = magnetic_gradient(v, cs, g);
  const RealField gm = magnitude(gv);

  rep.X = xdot_norm(g, v, quad_degree);
  rep.Y = ydot_norm(g, vm);
  rep.Ystar_f = ystar_norm(g, fm);
  rep.gradY = ydot_norm(g, gm);

  // ||(a grad^b v)_T||_{L^2}
  {
    const double h = g.h(), h3 = h * h * h, rc = 0.5 * h;
    std::vector<double> t;
    for (std::size_t node = 0; node < g.num_nodes(); node++)
    {
      if (!g.in_domain(node) || g.cls[node] == NodeClass::Origin)
        continue;
      const Vec3 x = g.x(node);
      const Vec3 xh = (1.0 / norm(x)) * x;
      const Mat3 a = cs.is_flat() ? identity3() : cs.a(cs.metric_point(x, rc));
      t.push_back(GradientField::sq(GradientField::tangential(GradientField::metric_image(a, gv.g[node]), xh)) * h3);
    }
    rep.tangL2 = std::sqrt(pairwise_sum(t.data(), t.size()));
  }
  rep.w3half = weighted_l2(g, vm, -1.5);
  rep.w3half_term = (cs.dim - 3) * rep.w3half;

  rep.lhs = rep.X + std::sqrt(std::abs(lambda) + std::abs(eps)) * rep.Y + rep.gradY + rep.tangL2 +
            rep.w3half_term;
  if (rep.Ystar_f > 0)
    rep.Q = rep.lhs / rep.Ystar_f;
  else if (rep.lhs > 0)
  {
    rep.Q = INFINITY;
    rep.Q_infinite = true;
  }

  rep.mixed.push_back({kInf, kInf, 2, -1, dyadic_norm(g, vm, kInf, kInf, 2, -1, quad_degree), "X_dyadic"});
  rep.mixed.push_back({kInf, 2, 2, -0.5, dyadic_norm(g, vm, kInf, 2, 2, -0.5), "Y_dyadic"});
  rep.mixed.push_back({1, 2, 2, 0.5, dyadic_norm(g, fm, 1, 2, 2, 0.5), "Ystar_dyadic"});
  return rep;
}

GradientField sommerfeld_field(const Field &v, const GradientField &gv, const Grid &g,
                               double lambda)
{
  GradientField out;
  out.g.assign(g.num_nodes(), CVec3{});
  const cplx ik(0, std::sqrt(std::max(lambda, 0.0)));
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.is_unknown(node) || g.cls[node] == NodeClass::Origin)
      continue;
    const Vec3 x = g.x(node);
    const double r = norm(x);
    for (int k = 0; k < 3; k++)
      out.g[node][k] = gv.g[node][k] - ik * (x[k] / r) * v[node];
  }
  return out;
}

SommerfeldTable sommerfeld_deficiency(const Field &v, const CoefficientSet &cs, const Grid &g,
                                      double lambda, double eps, double delta, int quad_degree)
{
  if (!(lambda > 0))
    fail(ErrorCode::InvalidArgument, "sommerfeld_deficiency requires lambda > 0");
  SommerfeldTable t;
  const GradientField gv = magnetic_gradient(v, cs, g);
  const GradientField gs = sommerfeld_field(v, gv, g, lambda);
  RealField d2(g.num_nodes()), v2(g.num_nodes()), fl(g.num_nodes());
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    d2[node] = GradientField::sq(gs.g[node]);
    v2[node] = std::norm(v[node]);
    fl[node] = 0;
    if (g.cls[node] != NodeClass::Origin && g.is_unknown(node))
    {
      const Vec3 x = g.x(node);
      const double r = norm(x);
      cplx dr = (gv.g[node][0] * x[0] + gv.g[node][1] * x[1] + gv.g[node][2] * x[2]) / r;
      fl[node] = std::imag(std::conj(v[node]) * dr);
    }
  }
  for (double R : dyadic_radii(g))
  {
    auto sq = SphereQuadrature::build(&g, R, quad_degree);
    t.radii.push_back(R);
    t.D.push_back(sphere_integral(g, sq, d2));
    t.mass.push_back(sphere_integral(g, sq, v2));
    t.flux.push_back(sphere_integral(g, sq, fl));
  }
  const double h = g.h(), h3 = h * h * h;
  std::vector<double> a, b;
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.in_domain(node) || g.cls[node] == NodeClass::Origin)
      continue;
    const double r = norm(g.x(node));
    a.push_back(std::pow(r, delta - 1) * d2[node] * h3);
    b.push_back(std::abs(eps) / std::sqrt(lambda) * std::pow(r, delta) * d2[node] * h3);
  }
  t.weighted = pairwise_sum(a.data(), a.size());
  t.weighted_eps = pairwise_sum(b.data(), b.size());
  return t;
}

}  // namespace lapkit
