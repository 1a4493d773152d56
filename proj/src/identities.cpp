// SPDX-License-Identifier: Apache-2.0
#include "identities.hpp"

#include <algorithm>
#include <cmath>

namespace lapkit
{

std::string to_string(SignConvention s)
{
  return s == SignConvention::OpL ? "opl" : "paper";
}

SignConvention parse_sign_convention(const std::string &s)
{
  if (s == "opl")
    return SignConvention::OpL;
  if (s == "paper")
    return SignConvention::Paper;
  fail(ErrorCode::Parse, "sign convention must be opl or paper");
}

namespace
{

// The identities are stated for f = A^b v - c v + ...; under OpL the operator's
// c enters them with the opposite sign.
double c_sign(SignConvention s)
{
  return s == SignConvention::OpL ? -1.0 : 1.0;
}

MetricJets jets_at(const CoefficientSet &cs, const Vec3 &x)
{
  if (cs.is_flat())
    return {Jet2::constant(1.0), Jet2::constant(3.0), Jet2::constant(0.0)};
  return cs.metric_jets(x);
}

CVec3 mat_apply(const Mat3 &a, const CVec3 &w)
{
  return GradientField::metric_image(a, w);
}

CVec3 real_apply(const Mat3 &a, const Vec3 &w)
{
  Vec3 r = matvec(a, w);
  return {r[0], r[1], r[2]};
}

// a(u, u) = a_jk u_k conj(u_j), real for symmetric a.
double aform(const Mat3 &a, const CVec3 &u)
{
  double s = 0;
  for (int j = 0; j < 3; j++)
    for (int k = 0; k < 3; k++)
      s += a[j][k] * std::real(u[k] * std::conj(u[j]));
  return s;
}

// sum_k w_k conj(u_k)
cplx dot_conj(const CVec3 &w, const CVec3 &u)
{
  return w[0] * std::conj(u[0]) + w[1] * std::conj(u[1]) + w[2] * std::conj(u[2]);
}

double sum(std::vector<double> &t)
{
  return pairwise_sum(t.data(), t.size());
}

// Re (Q + P) . n at a point with given v, grad^b v.
double flux_density(const CoefficientSet &cs, const WeightEval &we, const Vec3 &x, const Vec3 &n,
                    cplx v, const CVec3 &G, double lambda, double sc)
{
  const CVec3 aG = mat_apply(we.a, G);
  const CVec3 apsi = real_apply(we.a, we.grad_psi);
  const cplx s = dot_conj(apsi, G);
  const double af = aform(we.a, G);
  const double v2 = std::norm(v);
  const double cp = sc * cs.c(x);
  const Vec3 aDA = matvec(we.a, we.grad_Apsi);
  const Vec3 aDphi = matvec(we.a, we.grad_phi);
  double out = 0;
  for (int j = 0; j < 3; j++)
  {
    cplx Q = aG[j] * (we.Apsi * std::conj(v) + 2.0 * s) - 0.5 * aDA[j] * v2 -
             apsi[j] * ((cp - lambda) * v2 + af);
    cplx P = aG[j] * we.phi * std::conj(v) - 0.5 * aDphi[j] * v2;
    out += std::real(Q + P) * n[j];
  }
  return out;
}

CVec3 interpolate_gradient(const Grid &g, const GradientField &gv, const Vec3 &x)
{
  Interpolant it = interpolant(g, x);
  CVec3 r{};
  for (int c = 0; c < 8; c++)
    for (int k = 0; k < 3; k++)
      r[k] += it.w[c] * gv.g[it.idx[c]][k];
  return r;
}

}  // namespace

WeightPair weights_std(double R)
{
  if (!(R > 0))
    fail(ErrorCode::InvalidArgument, "weights_std: R must be positive");
  WeightPair w;
  w.R = R;
  return w;
}

WeightEval WeightPair::eval(const CoefficientSet &cs, const Vec3 &x) const
{
  WeightEval e;
  const double r = norm(x);
  if (!(r > 0))
    fail(ErrorCode::InvalidArgument, "weights are not evaluated at the origin");
  const Vec3 xh = (1.0 / r) * x;
  const MetricSample ms = cs.is_flat() ? MetricSample{identity3()} : cs.metric_at(x, 1);
  e.a = ms.a;
  e.psi1 = psi1(r);
  e.psi2 = psi2(r);
  e.grad_psi = e.psi1 * xh;
  const double p = e.psi1 / r, pp = (e.psi2 - p) / r;
  for (int j = 0; j < 3; j++)
    for (int k = 0; k < 3; k++)
      e.hess_psi[j][k] = (j == k ? p : 0.0) + pp * x[j] * x[k] / r;

  const MetricJets J = jets_at(cs, x);
  const Jet2 X[3] = {Jet2::coord(x, 0), Jet2::coord(x, 1), Jet2::coord(x, 2)};
  const Jet2 rj = sqrt(X[0] * X[0] + X[1] * X[1] + X[2] * X[2]);
  const Jet2 num = J.abar - J.ahat + rj * J.atil;
  Jet2 Apsi, g, phi;
  if (r < R)
  {
    Apsi = (1.0 / R) * (J.abar + rj * J.atil);
    g = (1.0 / R) * num;
    phi = (-1.0 / R) * J.ahat;
  }
  else
  {
    Apsi = (J.abar - J.ahat) / rj + J.atil;
    g = num / rj;
    phi = Jet2::constant(0.0);
  }
  e.Apsi = Apsi.v;
  e.grad_Apsi = Apsi.g;
  e.phi = phi.v;
  e.grad_phi = phi.g;
  e.Apsi_phi = g.v;
  double A2 = 0;
  for (int l = 0; l < 3; l++)
    for (int m = 0; m < 3; m++)
      A2 += e.a[l][m] * g.H[l][m] + ms.d1[l][l][m] * g.g[m];
  e.A2 = A2;

  // alpha_lm = 2 a_jm d_j(a_lk d_k psi) - a_jk d_k psi d_j a_lm
  double T[3][3];
  for (int l = 0; l < 3; l++)
    for (int j = 0; j < 3; j++)
    {
      double s = 0;
      for (int k = 0; k < 3; k++)
        s += ms.d1[j][l][k] * e.grad_psi[k] + e.a[l][k] * e.hess_psi[j][k];
      T[l][j] = s;
    }
  const Vec3 apsi = matvec(e.a, e.grad_psi);
  for (int l = 0; l < 3; l++)
    for (int m = 0; m < 3; m++)
    {
      double s = 0;
      for (int j = 0; j < 3; j++)
        s += 2 * e.a[j][m] * T[l][j] - apsi[j] * ms.d1[j][l][m];
      e.alpha[l][m] = s;
    }
  return e;
}

double WeightPair::delta_density(const CoefficientSet &cs, const Vec3 &x) const
{
  const DerivedScalars d = derived_metric_scalars(cs, x);
  const double hnum = d.abar - d.ahat + R * d.atil;
  return 0.5 * d.ahat * hnum / (R * R);
}

MorawetzBreakdown morawetz_residual(const Field &v, const Field &f, const CoefficientSet &cs,
                                    const Grid &g, double lambda, double eps,
                                    const WeightPair &w, const MorawetzOptions &opts)
{
  if (v.size() != g.num_nodes() || f.size() != g.num_nodes())
    fail(ErrorCode::InvalidArgument, "morawetz_residual: fields must live on the grid");
  MorawetzBreakdown mb;
  mb.R = w.R;
  mb.h = g.h();
  mb.R_out = opts.R_out > 0 ? opts.R_out : g.max_sphere_radius();
  if (mb.R_out > g.max_sphere_radius() + 1e-12)
    fail(ErrorCode::Geometry, "outer verification sphere reaches the sponge");
  const Obstacle &ob = g.cfg.obstacle;
  mb.R_in = opts.R_in >= 0 ? opts.R_in : (ob.empty() ? 0.0 : ob.max_radius() + 2 * g.h());
  if (mb.R_in >= mb.R_out)
    fail(ErrorCode::Geometry, "inner flux sphere outside the outer one");
  const double sc = c_sign(opts.convention);
  const double h = g.h(), h3 = h * h * h, rc = 0.5 * h;
  const GradientField gv = magnetic_gradient(v, cs, g);
  const bool magnetic = cs.has_magnetic();

  std::vector<double> tA, tP, tVv, tVp, tE, tB, tF;
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.in_domain(node) || g.cls[node] == NodeClass::Origin)
      continue;
    const Vec3 x = g.x(node);
    const double r = norm(x);
    if (r < mb.R_in || r >= mb.R_out)
      continue;
    const WeightEval we = w.eval(cs, x);
    const cplx vv = v[node], ff = f[node];
    const CVec3 &G = gv.g[node];
    const double v2 = std::norm(vv);
    const double af = aform(we.a, G);
    double ia = 0;
    for (int l = 0; l < 3; l++)
      for (int m = 0; m < 3; m++)
        ia += we.alpha[l][m] * std::real(G[m] * std::conj(G[l]));
    tA.push_back(ia * h3);
    tP.push_back(af * we.phi * h3);

    const double cp = sc * cs.c_clamped(x, rc);
    const Vec3 gc = sc * cs.grad_c(x);
    const Vec3 apsi = matvec(we.a, we.grad_psi);
    tVv.push_back(-0.5 * we.A2 * v2 * h3);
    tVp.push_back(-(dot(apsi, gc) - cp * we.phi + lambda * we.phi) * v2 * h3);

    const CVec3 apsic{apsi[0], apsi[1], apsi[2]};
    const cplx s = dot_conj(apsic, G);
    tE.push_back(2 * eps * std::imag(s * vv) * h3);
    if (magnetic)
    {
      if (cs.singular_distance(x) < rc)
      {
        mb.skipped_shells = true;
      }
      else
      {
        const Mat3 Jb = cs.db(x);
        const CVec3 aG = mat_apply(we.a, G);
        cplx t = 0;
        for (int j = 0; j < 3; j++)
          for (int l = 0; l < 3; l++)
            t += aG[j] * (Jb[l][j] - Jb[j][l]) * apsi[l];
        tB.push_back(2 * std::imag(t * std::conj(vv)) * h3);
      }
    }
    tF.push_back(std::real(we.Apsi_phi * std::conj(vv) * ff + 2.0 * s * ff) * h3);
  }
  mb.I_grad_alpha = sum(tA);
  mb.I_grad_phi = sum(tP);
  mb.I_grad = mb.I_grad_alpha + mb.I_grad_phi;
  mb.I_v_volume = sum(tVv);
  mb.I_v_potential = sum(tVp);
  mb.I_eps = sum(tE);
  mb.I_b = sum(tB);
  mb.I_f = sum(tF);

  // singular part of -A(A psi + phi)/2 on |x| = R
  if (w.R > mb.R_in && w.R < mb.R_out)
  {
    auto sq = SphereQuadrature::build(&g, w.R, opts.quad_degree);
    std::vector<double> t(sq.points.size());
    for (std::size_t q = 0; q < sq.points.size(); q++)
      t[q] = sq.weights[q] * w.delta_density(cs, sq.points[q]) *
             std::norm(interpolate(g, v, sq.points[q]));
    mb.I_v_delta = sum(t);
  }
  mb.I_v = mb.I_v_volume + mb.I_v_potential + mb.I_v_delta;

  auto sphere_flux = [&](double rho) {
    auto sq = SphereQuadrature::build(&g, rho, opts.quad_degree);
    std::vector<double> t(sq.points.size());
    for (std::size_t q = 0; q < sq.points.size(); q++)
    {
      const Vec3 &p = sq.points[q];
      const WeightEval we = w.eval(cs, p);
      const Vec3 n = (1.0 / norm(p)) * p;
      t[q] = sq.weights[q] * flux_density(cs, we, p, n, interpolate(g, v, p),
                                          interpolate_gradient(g, gv, p), lambda, sc);
    }
    return sum(t);
  };
  mb.flux_out = sphere_flux(mb.R_out);
  mb.flux_in = mb.R_in > 0 ? sphere_flux(mb.R_in) : 0.0;

  mb.volume_total = mb.I_grad + mb.I_v + mb.I_eps + mb.I_b + mb.I_f;
  mb.residual = std::abs(mb.volume_total - (mb.flux_out - mb.flux_in));
  mb.normalization = std::abs(mb.I_grad_alpha) + std::abs(mb.I_grad_phi) +
                     std::abs(mb.I_v_volume) + std::abs(mb.I_v_potential) +
                     std::abs(mb.I_v_delta) + std::abs(mb.I_eps) + std::abs(mb.I_b) +
                     std::abs(mb.I_f) + std::abs(mb.flux_out) + std::abs(mb.flux_in);
  return mb;
}

ObstacleFlux obstacle_flux(const Field &v, const CoefficientSet &cs, const Grid &g,
                           const WeightPair &w, int samples)
{
  ObstacleFlux out;
  const Obstacle &ob = g.cfg.obstacle;
  if (ob.empty())
    return out;
  const double h = g.h(), s = 1.5 * h;
  std::vector<double> ct, wt;
  gauss_legendre(samples, ct, wt);
  const int nphi = 2 * samples;
  std::vector<double> terms;
  out.max_density = -INFINITY;
  for (int i = 0; i < samples; i++)
  {
    const double th = std::acos(ct[i]), st = std::sqrt(1 - ct[i] * ct[i]);
    for (int j = 0; j < nphi; j++)
    {
      const double ph = 2 * M_PI * (j + 0.5) / nphi;
      const Vec3 p = ob.boundary_point(th, ph);
      // surface element |d_theta p x d_phi p| by central differences
      const double e = 1e-6;
      const Vec3 pt = (0.5 / e) * (ob.boundary_point(th + e, ph) - ob.boundary_point(th - e, ph));
      const Vec3 pp = (0.5 / e) * (ob.boundary_point(th, ph + e) - ob.boundary_point(th, ph - e));
      const Vec3 cr{pt[1] * pp[2] - pt[2] * pp[1], pt[2] * pp[0] - pt[0] * pp[2],
                    pt[0] * pp[1] - pt[1] * pp[0]};
      const double dS = norm(cr) * (wt[i] / st) * (2 * M_PI / nphi);
      const Vec3 nu = ob.domain_normal(p);
      // one-sided normal derivative of the Dirichlet trace
      const cplx f1 = interpolate(g, v, p - s * nu), f2 = interpolate(g, v, p - 2 * s * nu);
      const cplx dnu = -(4.0 * f1 - f2) / (2 * s);
      const CVec3 G{dnu * nu[0], dnu * nu[1], dnu * nu[2]};
      const WeightEval we = w.eval(cs, p);
      const double d = flux_density(cs, we, p, nu, 0.0, G, 0.0, 1.0);
      out.max_density = std::max(out.max_density, d);
      terms.push_back(d * dS);
    }
  }
  out.samples = terms.size();
  out.integral = sum(terms);
  return out;
}

namespace
{

// Discrete Dirichlet form sum_e a_e |G_e v|^2 h^3 (plus plaquette cross terms),
// mirroring the assembled stencil.
double discrete_dirichlet_form(const DiscreteOperator &op, const Field &v)
{
  const Grid &g = *op.grid;
  const CoefficientSet &cs = *op.coeffs;
  const double h = g.h(), h3 = h * h * h, rc = op.clamp_radius();
  const bool flat = cs.is_flat();
  const bool diag_metric = flat || cs.metric.kind == MetricModel::Kind::Constant;
  const bool magnetic = cs.has_magnetic();
  const cplx I(0, 1);
  auto a_at = [&](const Vec3 &x) { return flat ? identity3() : cs.a(cs.metric_point(x, rc)); };
  auto b_at = [&](const Vec3 &x, int d) { return magnetic ? cs.b_clamped(x, rc)[d] : 0.0; };
  auto val = [&](int i, int j, int k) {
    std::size_t idx = g.index(i, j, k);
    return g.is_unknown(idx) ? v[idx] : cplx(0);
  };
  std::vector<double> terms;
  for (int i = 0; i < g.n; i++)
    for (int j = 0; j < g.n; j++)
      for (int k = 0; k < g.n; k++)
      {
        const int P[3] = {i, j, k};
        const std::size_t lo = g.index(i, j, k);
        for (int d = 0; d < 3; d++)
        {
          if (P[d] + 1 >= g.n)
            continue;
          int Q[3] = {i, j, k};
          Q[d]++;
          const std::size_t hi = g.index(Q[0], Q[1], Q[2]);
          const bool ulo = g.is_unknown(lo), uhi = g.is_unknown(hi);
          if (!ulo && !uhi)
            continue;
          if (op.robin && (g.cls[lo] == NodeClass::Outer || g.cls[hi] == NodeClass::Outer))
            continue;  // ghost edge: part of the truncation term
          Vec3 mid = g.x(lo);
          mid[d] += 0.5 * h;
          const double a = a_at(mid)[d][d];
          const double bd = b_at(mid, d);
          const cplx Ge = (1.0 / h + 0.5 * I * bd) * (uhi ? v[hi] : cplx(0)) +
                          (-1.0 / h + 0.5 * I * bd) * (ulo ? v[lo] : cplx(0));
          terms.push_back(a * std::norm(Ge) * h3);
        }
        if (diag_metric)
          continue;
        for (int kk = 0; kk < 3; kk++)
          for (int ll = kk + 1; ll < 3; ll++)
          {
            if (P[kk] + 1 >= g.n || P[ll] + 1 >= g.n)
              continue;
            bool any = false;
            cplx cv[2][2];
            for (int ik = 0; ik < 2; ik++)
              for (int il = 0; il < 2; il++)
              {
                int C[3] = {i, j, k};
                C[kk] += ik;
                C[ll] += il;
                any = any || g.is_unknown(g.index(C[0], C[1], C[2]));
                cv[ik][il] = val(C[0], C[1], C[2]);
              }
            if (!any)
              continue;
            const Vec3 x00 = g.x(lo);
            Vec3 center = x00;
            center[kk] += 0.5 * h;
            center[ll] += 0.5 * h;
            const double akl = a_at(center)[kk][ll];
            if (akl == 0)
              continue;
            cplx Dk = 0, Dl = 0;
            for (int il = 0; il < 2; il++)
            {
              Vec3 m = x00;
              m[kk] += 0.5 * h;
              m[ll] += il * h;
              const double bk = b_at(m, kk);
              Dk += 0.5 * ((-1.0 / h + 0.5 * I * bk) * cv[0][il] + (1.0 / h + 0.5 * I * bk) * cv[1][il]);
            }
            for (int ik = 0; ik < 2; ik++)
            {
              Vec3 m = x00;
              m[ll] += 0.5 * h;
              m[kk] += ik * h;
              const double bl = b_at(m, ll);
              Dl += 0.5 * ((-1.0 / h + 0.5 * I * bl) * cv[ik][0] + (1.0 / h + 0.5 * I * bl) * cv[ik][1]);
            }
            terms.push_back(akl * 2 * std::real(std::conj(Dl) * Dk) * h3);
          }
      }
  return sum(terms);
}

double rel(double num, double den)
{
  return den != 0 ? std::abs(num) / std::abs(den) : std::abs(num);
}

}  // namespace

New1Result identity_new1(const Field &v, const Field &f, const DiscreteOperator &op,
                         SignConvention convention)
{
  const Grid &g = *op.grid;
  const CoefficientSet &cs = *op.coeffs;
  if (v.size() != g.num_nodes() || f.size() != g.num_nodes())
    fail(ErrorCode::InvalidArgument, "identity_new1: fields must live on the grid");
  const double h = g.h(), h3 = h * h * h, rc = op.clamp_radius();
  const double cs_sign = convention == SignConvention::OpL ? 1.0 : -1.0;
  std::vector<double> m, c, tre, tim, fre, fim, dc;
  const GradientField gv = magnetic_gradient(v, cs, g);
  for (std::size_t u = 0; u < g.num_unknowns(); u++)
  {
    const std::size_t node = g.node_of[u];
    const Vec3 x = g.x(node);
    const double v2 = std::norm(v[node]);
    m.push_back(v2 * h3);
    c.push_back(cs.c_clamped(x, rc) * v2 * h3);
    const cplx t = op.truncation_diag.empty() ? cplx(0) : op.truncation_diag[u] * v2 * h3;
    tre.push_back(t.real());
    tim.push_back(t.imag());
    const cplx fv = f[node] * std::conj(v[node]) * h3;
    fre.push_back(fv.real());
    fim.push_back(fv.imag());
    const Mat3 a = cs.is_flat() ? identity3() : cs.a(cs.metric_point(x, rc));
    dc.push_back(aform(a, gv.g[node]) * h3);
  }
  const double M = sum(m), C = sum(c), Tre = sum(tre), Tim = sum(tim), Fre = sum(fre),
               Fim = sum(fim);
  New1Result r;
  r.lhs1 = op.eps * M;
  r.rhs1 = Fim;
  r.trunc1 = Tim;
  r.res1 = rel(r.lhs1 + r.trunc1 - r.rhs1, r.rhs1);
  r.res1_raw = rel(r.lhs1 - r.rhs1, r.rhs1);
  r.lhs2 = discrete_dirichlet_form(op, v);
  r.rhs2 = op.lambda * M + cs_sign * C - Fre;
  r.trunc2 = Tre;
  r.res2 = rel(r.lhs2 - r.rhs2 - r.trunc2, r.lhs2);
  r.res2_raw = rel(r.lhs2 - r.rhs2, r.lhs2);
  r.lhs2_centered = sum(dc);
  r.res2_centered = rel(r.lhs2_centered - r.rhs2 - r.trunc2, r.lhs2_centered);
  return r;
}

HardyResult hardy_check(const Field &w, const CoefficientSet &cs, const Grid &g, double s)
{
  if (!(s < 0.5 * cs.dim))
    fail(ErrorCode::InvalidArgument, "hardy_check requires s < n/2");
  if (w.size() != g.num_nodes())
    fail(ErrorCode::InvalidArgument, "hardy_check: field size does not match the grid");
  for (std::size_t node = 0; node < g.num_nodes(); node++)
    if (!g.in_domain(node) && w[node] != cplx(0))
      fail(ErrorCode::InvalidArgument, "hardy_check: field touches the sponge or the boundary");
  const GradientField gw = magnetic_gradient(w, cs, g);
  const double h = g.h(), h3 = h * h * h;
  std::vector<double> l, r;
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.in_domain(node) || g.cls[node] == NodeClass::Origin)
      continue;
    const double rad = norm(g.x(node));
    l.push_back(std::pow(rad, -2 * s) * std::norm(w[node]) * h3);
    r.push_back(std::pow(rad, 2 - 2 * s) * GradientField::sq(gw.g[node]) * h3);
  }
  HardyResult out;
  out.lhs = std::sqrt(sum(l));
  out.rhs = 2.0 / (cs.dim - 2 * s) * std::sqrt(sum(r));
  out.ratio = out.rhs > 0 ? out.lhs / out.rhs : (out.lhs > 0 ? INFINITY : 0.0);
  return out;
}

void manufactured_gaussian(const CoefficientSet &cs, const Grid &g, double lambda, double eps,
                           SignConvention convention, Field &v, Field &f)
{
  v = g.zeros();
  f = g.zeros();
  const cplx I(0, 1), amp(1, 1);
  const double sc = convention == SignConvention::OpL ? 1.0 : -1.0;
  const double rc = 0.5 * g.h();
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.is_unknown(node))
      continue;
    const Vec3 x = g.x(node);
    const double r2 = dot(x, x);
    const cplx vv = amp * std::exp(-r2);
    const MetricSample ms = cs.is_flat() ? MetricSample{identity3()} : cs.metric_at(cs.metric_point(x, rc), 1);
    const Vec3 b = cs.has_magnetic() ? cs.b_clamped(x, rc) : Vec3{};
    const Mat3 Jb = cs.has_magnetic() ? cs.db_clamped(x, rc) : Mat3{};
    cplx dv[3], db[3];
    for (int k = 0; k < 3; k++)
    {
      dv[k] = -2 * x[k] * vv;
      db[k] = dv[k] + I * b[k] * vv;
    }
    // A^b v = d_j(a_jk D_k v) + i b_j a_jk D_k v
    cplx Av = 0;
    for (int j = 0; j < 3; j++)
      for (int k = 0; k < 3; k++)
      {
        const cplx d2v = (4 * x[j] * x[k] - (j == k ? 2.0 : 0.0)) * vv;
        Av += ms.d1[j][j][k] * db[k] +
              ms.a[j][k] * (d2v + I * Jb[k][j] * vv + I * b[k] * dv[j]) +
              I * b[j] * ms.a[j][k] * db[k];
      }
    v[node] = vv;
    f[node] = Av + sc * cs.c_clamped(x, rc) * vv + cplx(lambda, eps) * vv;
  }
}

namespace
{

struct GridSups
{
  double aI = 0, xa1 = 0, N = 0, cneg = 0, cLneg = 0, x2cneg2 = 0;
};

GridSups grid_sups(const CoefficientSet &cs, const Grid &g)
{
  GridSups s;
  const double rc = 0.5 * g.h();
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.in_domain(node) || g.cls[node] == NodeClass::Origin)
      continue;
    const Vec3 x = g.x(node);
    const double r = norm(x);
    if (!cs.is_flat())
    {
      const MetricSample ms = cs.metric_at(x, 1);
      Mat3 d = ms.a;
      for (int i = 0; i < 3; i++)
        d[i][i] -= 1;
      s.aI = std::max(s.aI, sym_opnorm(d));
      s.N = std::max(s.N, sym_opnorm(ms.a));
      double a1 = 0;
      for (int k = 0; k < 3; k++)
      {
        Mat3 m;
        for (int i = 0; i < 3; i++)
          for (int j = 0; j < 3; j++)
            m[i][j] = ms.d1[k][i][j];
        a1 += sym_opnorm(m);
      }
      s.xa1 = std::max(s.xa1, r * a1);
    }
    else
      s.N = 1;
    const double c = cs.c_clamped(x, rc);
    s.cneg = std::max(s.cneg, -c);
    s.cLneg = std::max(s.cLneg, -cs.c_long(x));
    if (r <= 2)
      s.x2cneg2 = std::max(s.x2cneg2, r * r * std::max(0.0, -c));
  }
  return s;
}

// l^1 over the grid shells of per-shell node sups of q(x).
template <typename F>
double shell_l1_sup(const Grid &g, F &&q)
{
  std::vector<double> sh(g.shell_hi - g.shell_lo + 1, 0.0);
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.in_domain(node) || g.cls[node] == NodeClass::Origin)
      continue;
    const Vec3 x = g.x(node);
    int s = shell_of(norm(x));
    if (s < g.shell_lo || s > g.shell_hi)
      continue;
    sh[s - g.shell_lo] = std::max(sh[s - g.shell_lo], q(x));
  }
  return pairwise_sum(sh.data(), sh.size());
}

double sommerfeld_K(const CoefficientSet &cs, const Grid &g, double delta)
{
  return shell_l1_sup(g, [&](const Vec3 &x) {
           const double r = norm(x);
           if (cs.is_flat())
             return 0.0;
           const MetricSample ms = cs.metric_at(x, 1);
           Mat3 d = ms.a;
           for (int i = 0; i < 3; i++)
             d[i][i] -= 1;
           double a1 = 0;
           for (int k = 0; k < 3; k++)
           {
             Mat3 m;
             for (int i = 0; i < 3; i++)
               for (int j = 0; j < 3; j++)
                 m[i][j] = ms.d1[k][i][j];
             a1 += sym_opnorm(m);
           }
           return std::pow(r, delta) * (sym_opnorm(d) + r * a1);
         }) +
         shell_l1_sup(g, [&](const Vec3 &x) {
           const double r = norm(x);
           return std::pow(r, delta + 1) * norm(tangential_field(cs, x, Part::Long));
         }) +
         shell_l1_sup(g, [&](const Vec3 &x) {
           return std::pow(norm(x), delta) * std::abs(cs.c_long(x));
         });
}

LemmaRow row(const std::string &name, bool ok, double lhs, double rhs, double h,
             const std::string &note = "")
{
  LemmaRow r;
  r.name = name;
  r.regime_ok = ok;
  r.lhs = lhs;
  r.rhs_structural = rhs;
  r.ratio = rhs > 0 ? lhs / rhs : (lhs > 0 ? INFINITY : 0.0);
  r.h = h;
  r.note = note;
  return r;
}

}  // namespace

std::vector<LemmaRow> lemma_inequality_suite(const Field &v, const Field &f,
                                             const CoefficientSet &cs, const Grid &g,
                                             double lambda, double eps, double delta,
                                             const AssumptionReport *assumptions)
{
  std::vector<LemmaRow> rows;
  const double h = g.h(), h3 = h * h * h;
  AssumptionReport local;
  if (!assumptions)
  {
    local = assumption_report(cs, g);
    assumptions = &local;
  }
  const AssumptionReport &ar = *assumptions;
  const GridSups gs = grid_sups(cs, g);
  const NormReport nr = norm_report(v, f, cs, g, lambda, eps);
  const double X = nr.X, Y = nr.Y, gY = nr.gradY, Ys = nr.Ystar_f;
  const GradientField gv = magnetic_gradient(v, cs, g);
  const double d0 = 0.5;  // the free parameter of the lemmas

  // Multiplier integrals, sup over the dyadic radii.
  double supIf = -INFINITY, supIb = 0, supIeps = 0, supIgrad = -INFINITY, supIv = -INFINITY;
  {
    auto radii = dyadic_radii(g);
    if (radii.size() > 1)
      radii.pop_back();
    for (double R : radii)
    {
      // R sits on lattice shells; shift by h/4 keeps the delta sphere off the nodes
      const WeightPair w = weights_std(R);
      const MorawetzBreakdown mb = morawetz_residual(v, f, cs, g, lambda, eps, w);
      supIf = std::max(supIf, mb.I_f);
      supIb = std::max(supIb, std::abs(mb.I_b));
      supIeps = std::max(supIeps, std::abs(mb.I_eps));
      supIgrad = std::max(supIgrad, mb.I_grad);
      supIv = std::max(supIv, mb.I_v);
    }
  }

  // Lemma I_eps estimate (squared norm of f on the right)
  {
    const double sg = 0.5;
    const double rhs = sg * (std::abs(lambda) + std::abs(eps) + gs.cneg) * Y * Y +
                       std::pow(sg, -4) * Ys * Ys;
    rows.push_back(row("new2", gs.aI <= 0.5, supIeps, rhs, h, "sigma = 1/2, c_I = c"));
  }
  rows.push_back(row("new3", true, std::sqrt(std::abs(eps)) * Y, gs.N * (gY + X + Ys), h));
  rows.push_back(row("new4b", false, 0, 0, h, "requires n >= 4"));
  {
    const bool ok = lambda <= 0 && gs.aI + gs.xa1 <= 0.125;
    const double lm = std::max(0.0, -lambda);
    const double lhs = lm * std::pow(weighted_l2(g, magnitude(v), -0.5), 2) +
                       std::pow(weighted_l2(g, magnitude(gv), -0.5), 2);
    const double x2c = shell_l1_sup(g, [&](const Vec3 &x) {
      return dot(x, x) * std::max(0.0, -cs.c_clamped(x, 0.5 * h));
    });
    rows.push_back(row("new4c", ok, lhs, (x2c + d0) * X * X + Ys * Ys / d0, h,
                       ok ? "" : "requires lambda <= 0 and small |a-I| + |x||a'|"));
  }
  rows.push_back(row("new01", false, 0, 0, h, "requires n >= 4"));
  rows.push_back(row("new8", true, supIf, d0 * X * X + d0 * gY * gY + Ys * Ys / d0, h,
                     "delta = 1/2"));
  rows.push_back(row("lemma_Ib", true, supIb,
                     2 * gs.N * (ar.beta1.value * gY * X + ar.beta3.value * gY * Y), h,
                     "C = 2 ||a|| ||grad psi||"));
  {
    std::vector<double> t, t2;
    for (std::size_t node = 0; node < g.num_nodes(); node++)
    {
      if (!g.in_domain(node) || g.cls[node] == NodeClass::Origin)
        continue;
      const Vec3 x = g.x(node);
      const double r = norm(x);
      const Mat3 a = cs.is_flat() ? identity3() : cs.a(x);
      const CVec3 aT = GradientField::tangential(mat_apply(a, gv.g[node]), (1.0 / r) * x);
      t.push_back(GradientField::sq(aT) / r * h3);
      double a1 = 0;
      if (!cs.is_flat())
      {
        const MetricSample ms = cs.metric_at(x, 1);
        for (int k = 0; k < 3; k++)
        {
          Mat3 m;
          for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++)
              m[i][j] = ms.d1[k][i][j];
          a1 += sym_opnorm(m);
        }
      }
      t2.push_back(a1 * GradientField::sq(gv.g[node]) * h3);
    }
    const double lower = (1 - 6 * gs.aI) * gY * gY + sum(t) - sum(t2);
    rows.push_back(row("lemma_Igradv", true, lower, supIgrad, h, "lower bound / sup_R int I_grad"));
  }
  {
    const double Ca = ar.kappa_metric.value;
    const double lower = (1 - ar.gamma1.value - ar.gamma2.value - Ca) * X * X +
                         (lambda - ar.Gamma3.value - ar.Gamma4.value) * Y * Y -
                         (ar.gamma2.value + d0) * gY * gY;
    rows.push_back(row("lemma_Iv", true, lower, supIv, h, "c(n) = 1; lower bound / sup_R int I_v"));
  }
  {
    const bool ok = lambda > 0 && lambda <= std::abs(eps);
    std::vector<double> a, b;
    for (std::size_t node = 0; node < g.num_nodes(); node++)
      if (g.in_domain(node))
      {
        a.push_back(GradientField::sq(gv.g[node]) * h3);
        b.push_back(std::norm(v[node]) * h3);
      }
    const double lhs = sum(a) + lambda * sum(b);
    const double K = gs.cLneg;
    rows.push_back(row("estlambdaep", ok, lhs, (1 + (lambda > 0 ? K / lambda : 0)) * (Y * Y + Ys * Ys),
                       h, ok ? "" : "requires 0 < lambda <= |eps|"));
  }
  if (lambda > 0)
  {
    const GradientField gsf = sommerfeld_field(v, gv, g, lambda);
    const double e = std::abs(eps) / std::sqrt(lambda);
    auto som = [&](double dl, double &tang, double &mix, double &fw, double &f2) {
      std::vector<double> t1, t2, t3, t4;
      for (std::size_t node = 0; node < g.num_nodes(); node++)
      {
        if (!g.in_domain(node) || g.cls[node] == NodeClass::Origin)
          continue;
        const Vec3 x = g.x(node);
        const double r = norm(x);
        const Mat3 a = cs.is_flat() ? identity3() : cs.a(x);
        const CVec3 aT = GradientField::tangential(mat_apply(a, gv.g[node]), (1.0 / r) * x);
        t1.push_back(std::pow(r, 2 * dl - 2) * GradientField::sq(aT) * h3);
        t2.push_back((std::pow(r, dl - 1) + e * std::pow(r, dl)) * GradientField::sq(gsf.g[node]) * h3);
        t3.push_back(std::pow(r, dl) * std::sqrt(1 + r * r) * std::norm(f[node]) * h3);
        t4.push_back(r * r * std::norm(f[node]) * h3);
      }
      tang = sum(t1);
      mix = sum(t2);
      fw = sum(t3);
      f2 = sum(t4);
    };
    const bool ok = lambda > std::abs(eps);
    double tang, mix, fw, f2;
    som(delta, tang, mix, fw, f2);
    const double K = sommerfeld_K(cs, g, delta);
    if (delta < 1)
      rows.push_back(row("sommerest1b", ok, (1 - delta) * tang + mix,
                         (1 + K) * ((1 + lambda) * Y * Y + gY * gY + fw), h,
                         ok ? "" : "requires lambda > |eps|"));
    som(1.0, tang, mix, fw, f2);
    const double K1 = sommerfeld_K(cs, g, 1.0);
    rows.push_back(row("sommerest2b", ok, mix,
                       (1 + K1) * ((1 + lambda) * Y * Y + gY * gY + Ys * Ys + f2), h,
                       ok ? "" : "requires lambda > |eps|"));
  }
  {
    const double Gam = gs.aI + gs.x2cneg2;
    double best = -1, bl = 0, br = 0;
    for (double R : dyadic_radii(g))
    {
      if (R + 1 > g.max_sphere_radius())
        break;
      std::vector<double> a, b;
      for (std::size_t node = 0; node < g.num_nodes(); node++)
      {
        if (!g.in_domain(node))
          continue;
        const double r = norm(g.x(node));
        if (r <= R)
          a.push_back(GradientField::sq(gv.g[node]) * h3);
        if (r <= R + 1)
          b.push_back((std::norm(v[node]) + std::norm(f[node])) * h3);
      }
      const double l = sum(a), rr = sum(b);
      const double ratio = rr > 0 ? l / rr : 0;
      if (ratio > best)
      {
        best = ratio;
        bl = l;
        br = rr;
      }
    }
    rows.push_back(row("localbound", Gam <= 0.5, bl, br, h, "worst R over dyadic radii"));
  }
  rows.push_back(row("newsmoo", true, nr.lhs, Ys, h, "smoothing ratio Q"));
  return rows;
}

}  // namespace lapkit
