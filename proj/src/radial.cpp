// SPDX-License-Identifier: Apache-2.0
#include "radial.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geometry.hpp"

namespace lapkit
{

RadialCoefficients radial_from(const CoefficientSet &cs)
{
  if (cs.has_magnetic())
    fail(ErrorCode::InvalidArgument, "radial backend: magnetic potentials break separation");
  if (!cs.metric.is_radial())
    fail(ErrorCode::InvalidArgument, "radial backend: metric is not radial");
  for (auto &e : cs.electric)
    if (!e.radial())
      fail(ErrorCode::InvalidArgument, "radial backend: electric potential is not radial");
  RadialCoefficients rc;
  MetricModel m = cs.metric;
  rc.alpha = [m](double r) { return m.alpha_r(r); };
  rc.alpha_prime = [m](double r) { return m.alpha_r_prime(r); };
  rc.beta = [m](double r) { return m.beta_r(r); };
  std::vector<ElectricTerm> el = cs.electric;
  rc.c = [el](double r) {
    double s = 0;
    for (auto &t : el)
      s += t.value({r, 0, 0});
    return s;
  };
  return rc;
}

void fd_weights(double x0, const std::vector<double> &x, int mmax,
                std::vector<std::vector<double>> &c)
{
  // Fornberg, "Generation of finite difference formulas on arbitrarily spaced grids".
  const int n = int(x.size()) - 1;
  c.assign(n + 1, std::vector<double>(mmax + 1, 0.0));
  double c1 = 1, c4 = x[0] - x0;
  c[0][0] = 1;
  for (int i = 1; i <= n; i++)
  {
    int mn = std::min(i, mmax);
    double c2 = 1, c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; j++)
    {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1)
      {
        for (int k = mn; k >= 1; k--)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; k--)
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
}

double radial_map(const RadialProblem &p, double s)
{
  const double r0 = p.r_obs, L = p.r_far - p.r_obs, g = p.grading;
  if (g < 1e-8)
    return r0 + L * s;
  return r0 + L * std::sinh(g * s) / std::sinh(g);
}

double radial_map_inverse(const RadialProblem &p, double r)
{
  const double r0 = p.r_obs, L = p.r_far - p.r_obs, g = p.grading;
  if (g < 1e-8)
    return (r - r0) / L;
  return std::asinh((r - r0) / L * std::sinh(g)) / g;
}

namespace
{

void map_derivs(const RadialProblem &p, double s, double &r1, double &r2)
{
  const double L = p.r_far - p.r_obs, g = p.grading;
  if (g < 1e-8)
  {
    r1 = L;
    r2 = 0;
    return;
  }
  r1 = L * g * std::cosh(g * s) / std::sinh(g);
  r2 = L * g * g * std::sinh(g * s) / std::sinh(g);
}

// Outgoing log-derivative of r^{-(n-2)/2} H_nu(kr) from its two-term expansion.
cplx far_logderiv(const RadialProblem &p, int l, double r, cplx k)
{
  const double nu = l + 0.5 * (p.n - 2);
  const cplx I(0, 1);
  cplx a1 = I * (nu * nu - 0.25) / (2.0 * k);
  return I * k - 0.5 * (p.n - 1) / r - a1 / (r * r * (1.0 + a1 / r));
}

cplx branch_k(double lambda, double eps)
{
  cplx k = std::sqrt(cplx(lambda, eps));
  if (k.imag() < 0 || (k.imag() == 0 && k.real() < 0))
    k = -k;
  return k;
}

}  // namespace

RadialMode solve_mode(const RadialProblem &p, int l, const std::function<cplx(double)> &g)
{
  if (p.n < 3)
    fail(ErrorCode::InvalidArgument, "radial backend requires n >= 3");
  if (p.mesh_points < 16)
    fail(ErrorCode::InvalidArgument, "radial.mesh_points too small");
  if (!(p.r_far > p.r_obs))
    fail(ErrorCode::InvalidArgument, "radial.rfar must exceed the obstacle radius");
  const bool obstacle = p.r_obs > 0;
  const int N = p.mesh_points;
  RadialMode mode;
  mode.l = l;
  // node j -> s_j; parity case has ghosts at j = -1, -2.
  double ds;
  int first, last;
  auto s_of = [&](int j) { return obstacle ? j * ds : (j + 0.5) * ds; };
  if (obstacle)
  {
    ds = 1.0 / N;
    first = 1;
    last = N;
  }
  else
  {
    ds = 1.0 / (N - 0.5);
    first = 0;
    last = N - 1;
  }
  const int lo = obstacle ? 0 : -2;
  const int nunk = last - first + 1;
  const double parity = (l % 2 == 0) ? 1.0 : -1.0;
  const double L = double(l) * (l + p.n - 2);
  const cplx k = branch_k(p.lambda, p.eps);
  const cplx I(0, 1);

  const int kl = 5, ku = 5, ldab = 2 * kl + ku + 1;
  std::vector<lapack_complex_double> ab(std::size_t(ldab) * nunk);
  std::vector<lapack_complex_double> rhs(nunk);
  auto put = [&](int row, int col, cplx v) {
    std::size_t pos = std::size_t(kl + ku + row - col) + std::size_t(col) * ldab;
    cplx cur(ab[pos].real(), ab[pos].imag());
    cur += v;
    ab[pos] = lapack_complex_double(cur.real(), cur.imag());
  };
  // node -> (column, factor); Dirichlet node gives column -1
  auto column = [&](int j, double &fac) {
    fac = 1.0;
    if (obstacle)
      return j == 0 ? -1 : j - first;
    if (j < 0)
    {
      fac = parity;
      return -j - 1;
    }
    return j;
  };

  std::vector<std::vector<double>> w;
  for (int j = first; j <= last; j++)
  {
    const int row = j - first;
    const double s = s_of(j), r = radial_map(p, s);
    double r1, r2;
    map_derivs(p, s, r1, r2);
    std::vector<int> win;
    if (j == last)
      for (int t = last - 4; t <= last; t++)
        win.push_back(t);
    else
    {
      int a = j - 2;
      if (a < lo)
        a = lo;
      else if (j + 2 > last)
        a = last - 5;
      int b = (a == j - 2) ? j + 2 : a + 5;
      for (int t = a; t <= b; t++)
        win.push_back(t);
    }
    std::vector<double> sn;
    for (int t : win)
      sn.push_back(s_of(t));
    fd_weights(s, sn, 2, w);
    if (j == last)
    {
      // u_r = gamma u at the far end
      cplx gam = far_logderiv(p, l, r, k);
      for (std::size_t q = 0; q < win.size(); q++)
      {
        double fac;
        int col = column(win[q], fac);
        if (col >= 0)
          put(row, col, fac * w[q][1] / r1);
      }
      put(row, row, -gam);
      rhs[row] = 0;
      continue;
    }
    const double al = p.coeffs.alpha(r), alp = p.coeffs.alpha_prime(r), be = p.coeffs.beta(r);
    const double cr = p.coeffs.c(r);
    const double Arr = al, Ar = alp + (p.n - 1) * al / r;
    const cplx A0 = -be * L / (r * r) + cr + p.lambda + I * p.eps;
    for (std::size_t q = 0; q < win.size(); q++)
    {
      double fac;
      int col = column(win[q], fac);
      if (col < 0)
        continue;
      double d1 = w[q][1] / r1, d2 = w[q][2] / (r1 * r1) - r2 * w[q][1] / (r1 * r1 * r1);
      put(row, col, fac * (Arr * d2 + Ar * d1));
    }
    put(row, row, A0);
    cplx gv = g(r);
    rhs[row] = lapack_complex_double(gv.real(), gv.imag());
  }
  std::vector<lapack_int> ipiv(nunk);
  lapack_int info = LAPACKE_zgbsv(LAPACK_COL_MAJOR, nunk, kl, ku, 1, ab.data(), ldab,
                                  ipiv.data(), rhs.data(), nunk);
  if (info != 0)
    fail(ErrorCode::Numerical, "radial ODE solve failed for l=" + std::to_string(l) +
                                   " (LAPACK info " + std::to_string(info) + ")");
  if (obstacle)
  {
    mode.s.push_back(0);
    mode.r.push_back(p.r_obs);
    mode.u.push_back(0);
  }
  for (int j = first; j <= last; j++)
  {
    mode.s.push_back(s_of(j));
    mode.r.push_back(radial_map(p, s_of(j)));
    auto v = rhs[j - first];
    mode.u.emplace_back(v.real(), v.imag());
  }
  return mode;
}

namespace
{

cplx eval_mode(const RadialProblem &p, const RadialMode &m, double r, int deriv)
{
  if (r > p.r_far)
    fail(ErrorCode::InvalidArgument, "radial evaluation beyond rfar");
  if (r < p.r_obs)
    return 0;
  const double s = radial_map_inverse(p, r);
  const int n = int(m.s.size());
  auto it = std::upper_bound(m.s.begin(), m.s.end(), s);
  int j = int(it - m.s.begin()) - 1;
  int a = std::clamp(j - 2, 0, n - 6);
  std::vector<double> sn(m.s.begin() + a, m.s.begin() + a + 6);
  std::vector<std::vector<double>> w;
  fd_weights(s, sn, 1, w);
  cplx v = 0;
  for (int q = 0; q < 6; q++)
    v += w[q][deriv] * m.u[a + q];
  if (deriv == 1)
  {
    double r1, r2;
    map_derivs(p, s, r1, r2);
    v /= r1;
  }
  return v;
}

}  // namespace

cplx RadialMode::eval(const RadialProblem &p, double r) const
{
  return eval_mode(p, *this, r, 0);
}

cplx RadialMode::derivative(const RadialProblem &p, double r) const
{
  return eval_mode(p, *this, r, 1);
}

double real_sph_harm(int l, int m, const Vec3 &xh)
{
  double theta = std::acos(std::clamp(xh[2], -1.0, 1.0));
  double phi = std::atan2(xh[1], xh[0]);
  int am = std::abs(m);
  double P = std::sph_legendre(unsigned(l), unsigned(am), theta);
  if (m == 0)
    return P;
  return std::numbers::sqrt2 * P * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

cplx RadialSolution::eval(const Vec3 &x) const
{
  const double r = norm(x);
  if (problem.lmax < 0)
    return eval_radial(r);
  cplx v = 0;
  Vec3 xh = r > 0 ? (1.0 / r) * x : Vec3{0, 0, 1};
  for (auto &m : modes)
    v += m.eval(problem, r) * real_sph_harm(m.l, m.m, xh);
  return v;
}

cplx RadialSolution::eval_radial(double r) const
{
  if (modes.size() != 1 || modes[0].l != 0)
    fail(ErrorCode::InvalidArgument, "eval_radial needs a single l=0 mode");
  cplx v = modes[0].eval(problem, r);
  return problem.lmax < 0 ? v : v * real_sph_harm(0, 0, {0, 0, 1});
}

RadialSolution reduce_and_solve_radial(const RadialProblem &p,
                                       const std::function<cplx(double)> &f_radial)
{
  RadialSolution sol;
  sol.problem = p;
  sol.problem.lmax = -1;  // marks a direct radial profile
  sol.modes.push_back(solve_mode(p, 0, f_radial));
  return sol;
}

RadialSolution reduce_and_solve(const RadialProblem &p, const std::function<cplx(const Vec3 &)> &f)
{
  if (p.n != 3)
    fail(ErrorCode::InvalidArgument, "harmonic projection is implemented for n = 3 only");
  if (p.lmax < 0)
    fail(ErrorCode::InvalidArgument, "radial.lmax must be >= 0");
  RadialSolution sol;
  sol.problem = p;
  // probe radii: the mesh nodes of mode 0
  const int nt = std::max(2 * p.lmax + 4, 16), np = 2 * nt;
  std::vector<double> ct, wt;
  gauss_legendre(nt, ct, wt);
  std::vector<Vec3> dirs;
  std::vector<double> dw;
  for (int i = 0; i < nt; i++)
  {
    double st = std::sqrt(std::max(0.0, 1 - ct[i] * ct[i]));
    for (int j = 0; j < np; j++)
    {
      double phi = 2 * std::numbers::pi * (j + 0.5) / np;
      dirs.push_back({st * std::cos(phi), st * std::sin(phi), ct[i]});
      dw.push_back(wt[i] * 2 * std::numbers::pi / np);
    }
  }
  const int nlm = (p.lmax + 1) * (p.lmax + 1);
  std::vector<std::vector<double>> Y(nlm, std::vector<double>(dirs.size()));
  std::vector<std::pair<int, int>> lm;
  for (int l = 0; l <= p.lmax; l++)
    for (int m = -l; m <= l; m++)
    {
      for (std::size_t q = 0; q < dirs.size(); q++)
        Y[lm.size()][q] = real_sph_harm(l, m, dirs[q]);
      lm.emplace_back(l, m);
    }
  // Project f at exactly the radii where solve_mode samples its source.
  const bool obstacle = p.r_obs > 0;
  const int N = p.mesh_points;
  std::vector<double> rs;
  if (obstacle)
    for (int j = 1; j <= N; j++)
      rs.push_back(radial_map(p, double(j) / N));
  else
    for (int j = 0; j < N; j++)
      rs.push_back(radial_map(p, (j + 0.5) / (N - 0.5)));
  const int nr = int(rs.size());
  std::vector<std::vector<cplx>> coef(nlm, std::vector<cplx>(nr));
  double total = 0, captured = 0;
  for (int i = 0; i < nr; i++)
  {
    std::vector<cplx> fv(dirs.size());
    double e = 0;
    for (std::size_t q = 0; q < dirs.size(); q++)
    {
      fv[q] = f(rs[i] * dirs[q]);
      e += dw[q] * std::norm(fv[q]);
    }
    double c = 0;
    for (int t = 0; t < nlm; t++)
    {
      cplx s = 0;
      for (std::size_t q = 0; q < dirs.size(); q++)
        s += dw[q] * fv[q] * Y[t][q];
      coef[t][i] = s;
      c += std::norm(s);
    }
    double wr = std::pow(rs[i], p.n - 1);
    total += wr * e;
    captured += wr * c;
  }
  sol.tail = total > 0 ? std::max(0.0, total - captured) / total : 0.0;
  if (sol.tail > 1e-10)
    fail(ErrorCode::Numerical, "harmonic tail of the source exceeds 1e-10 (increase radial.lmax)");
  double cmax = 0;
  for (auto &c : coef)
    for (auto &v : c)
      cmax = std::max(cmax, std::abs(v));
  for (int t = 0; t < nlm; t++)
  {
    double mx = 0;
    for (auto &v : coef[t])
      mx = std::max(mx, std::abs(v));
    if (mx <= 1e-14 * cmax)
      continue;
    const std::vector<cplx> &ct_ = coef[t];
    auto gfun = [&](double r) {
      auto it = std::lower_bound(rs.begin(), rs.end(), r);
      std::size_t i = std::min<std::size_t>(std::size_t(it - rs.begin()), rs.size() - 1);
      if (i > 0 && std::abs(rs[i - 1] - r) < std::abs(rs[i] - r))
        i--;
      return ct_[i];
    };
    RadialMode m = solve_mode(p, lm[t].first, gfun);
    m.m = lm[t].second;
    sol.modes.push_back(std::move(m));
  }
  return sol;
}

}  // namespace lapkit
