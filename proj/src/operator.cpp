// SPDX-License-Identifier: Apache-2.0
#include "operator.hpp"

#include <algorithm>

namespace lapkit
{

void CsrMatrix::multiply(const cplx *x, cplx *y) const
{
  for (std::size_t i = 0; i < n; i++)
  {
    cplx s = 0;
    for (std::int64_t p = rowptr[i]; p < rowptr[i + 1]; p++)
      s += val[p] * x[col[p]];
    y[i] = s;
  }
}

cplx CsrMatrix::diag(std::size_t i) const
{
  for (std::int64_t p = rowptr[i]; p < rowptr[i + 1]; p++)
    if (std::size_t(col[p]) == i)
      return val[p];
  return 0;
}

double CsrMatrix::hermitian_defect() const
{
  double worst = 0;
  for (std::size_t i = 0; i < n; i++)
    for (std::int64_t p = rowptr[i]; p < rowptr[i + 1]; p++)
    {
      std::size_t j = col[p];
      cplx aji = 0;
      for (std::int64_t q = rowptr[j]; q < rowptr[j + 1]; q++)
        if (std::size_t(col[q]) == i)
          aji = val[q];
      worst = std::max(worst, std::abs(val[p] - std::conj(aji)));
    }
  return worst;
}

std::string to_string(Truncation t)
{
  switch (t)
  {
  case Truncation::Sponge:
    return "sponge";
  case Truncation::Robin:
    return "robin";
  default:
    return "dirichlet";
  }
}

std::string to_string(OuterClosure c)
{
  return c == OuterClosure::Robin ? "robin" : "dirichlet";
}

Truncation parse_truncation(const std::string &s)
{
  if (s == "sponge")
    return Truncation::Sponge;
  if (s == "dirichlet")
    return Truncation::Dirichlet;
  if (s == "robin")
    return Truncation::Robin;
  fail(ErrorCode::Parse, "op.truncation must be robin, sponge or dirichlet");
}

OuterClosure parse_closure(const std::string &s)
{
  if (s == "robin")
    return OuterClosure::Robin;
  if (s == "dirichlet")
    return OuterClosure::Dirichlet;
  fail(ErrorCode::Parse, "op.outer_closure must be robin or dirichlet");
}

RealField sponge_profile(const Grid &g, double lambda, const OperatorOptions &opts,
                         double *sigma_out)
{
  RealField W(g.num_nodes(), 0.0);
  const double w = g.cfg.sponge_width;
  const double sigma =
      opts.sponge_sigma >= 0 ? opts.sponge_sigma : 2.0 * std::sqrt(std::max(lambda, 1.0));
  if (sigma_out)
    *sigma_out = sigma;
  if (opts.truncation != Truncation::Sponge || w <= 0)
    return W;
  if (w < 4 * g.h() - 1e-12)
    fail(ErrorCode::Geometry, "sponge width must be at least 4 h");
  const double inner = g.cfg.rmax - w;
  for (std::size_t idx = 0; idx < W.size(); idx++)
  {
    Vec3 x = g.x(idx);
    double m = std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])});
    if (m >= inner)
      W[idx] = sigma * std::pow(std::min(1.0, (m - inner) / w), opts.sponge_power);
  }
  return W;
}

namespace
{

struct RowBuilder
{
  std::vector<std::pair<std::int32_t, cplx>> e;
  void add(int col, cplx v)
  {
    if (col < 0)
      return;
    for (auto &p : e)
      if (p.first == col)
      {
        p.second += v;
        return;
      }
    e.emplace_back(col, v);
  }
};

}  // namespace

DiscreteOperator assemble(const CoefficientSet &cs, const Grid &g, double lambda, double eps,
                          const OperatorOptions &opts)
{
  if (cs.dim != 3)
    fail(ErrorCode::InvalidArgument, "the Cartesian backend requires dim = 3");
  if (!std::isfinite(lambda) || !std::isfinite(eps))
    fail(ErrorCode::InvalidArgument, "lambda and epsilon must be finite");
  DiscreteOperator op;
  op.lambda = lambda;
  op.eps = eps;
  op.opts = opts;
  op.grid = &g;
  op.coeffs = &cs;
  const bool sponge_on = opts.truncation == Truncation::Sponge && g.cfg.sponge_width > 0;
  if (sponge_on)
    op.sponge = sponge_profile(g, lambda, opts, &op.sigma);
  else
    op.sponge.assign(g.num_nodes(), 0.0);
  const bool robin = opts.truncation == Truncation::Robin ||
                     (sponge_on && opts.closure == OuterClosure::Robin);
  op.hermitian = eps == 0 && !sponge_on && !robin;
  op.robin = robin;

  const double h = g.h(), rc = op.clamp_radius();
  const double sgn = eps < 0 ? -1.0 : 1.0;
  const bool flat = cs.is_flat();
  const bool diag_metric = flat || cs.metric.kind == MetricModel::Kind::Constant;
  const bool magnetic = cs.has_magnetic();
  const cplx I(0, 1);

  auto a_at = [&](const Vec3 &x) { return flat ? identity3() : cs.a(cs.metric_point(x, rc)); };
  auto b_at = [&](const Vec3 &x, int d) { return magnetic ? cs.b_clamped(x, rc)[d] : 0.0; };
  auto unk = [&](int i, int j, int k) { return g.unknown[g.index(i, j, k)]; };

  CsrMatrix &A = op.A;
  A.n = g.num_unknowns();
  A.rowptr.assign(A.n + 1, 0);
  A.col.reserve(A.n * (diag_metric ? 7 : 19));
  A.val.reserve(A.n * (diag_metric ? 7 : 19));
  RowBuilder row;
  op.truncation_diag.assign(A.n, cplx(0));

  for (std::size_t u = 0; u < A.n; u++)
  {
    const std::size_t node = g.node_of[u];
    int P[3];
    g.ijk(node, P[0], P[1], P[2]);
    const Vec3 xp = g.x(node);
    row.e.clear();
    row.add(int(u), 0.0);

    // Edge terms: -a_dd conj(alpha_p) G_e on the 6 edges touching p.
    for (int d = 0; d < 3; d++)
      for (int side = -1; side <= 1; side += 2)
      {
        int Q[3] = {P[0], P[1], P[2]};
        Q[d] += side;
        Vec3 mid = xp;
        mid[d] += 0.5 * side * h;
        const double a = a_at(mid)[d][d];
        const std::size_t qnode = g.index(Q[0], Q[1], Q[2]);
        if (robin && g.cls[qnode] == NodeClass::Outer)
        {
          // The face node acts as a ghost fixed by the outgoing radial condition.
          double r = norm(mid);
          double W = sponge_on ? op.sigma : 0.0;
          cplx k = std::sqrt(cplx(lambda, std::abs(eps) + W));
          cplx gr = (side * mid[d] / r) * (I * k - 1.0 / r);
          if (sgn < 0)
            gr = std::conj(gr);
          const cplx ghost = (a / h) * gr / (1.0 - 0.5 * h * gr);
          row.add(int(u), ghost);
          op.truncation_diag[u] += ghost;
          continue;
        }
        const double bd = b_at(mid, d);
        const cplx a_hi = 1.0 / h + 0.5 * I * bd, a_lo = -1.0 / h + 0.5 * I * bd;
        const cplx ap = side > 0 ? a_lo : a_hi, aq = side > 0 ? a_hi : a_lo;
        row.add(int(u), -a * std::conj(ap) * ap);
        row.add(g.unknown[qnode], -a * std::conj(ap) * aq);
      }

    // Plaquette cross terms for off-diagonal metric entries.
    if (!diag_metric)
    {
      for (int k = 0; k < 3; k++)
        for (int l = k + 1; l < 3; l++)
          for (int sk = 0; sk <= 1; sk++)
            for (int sl = 0; sl <= 1; sl++)
            {
              int C0[3] = {P[0], P[1], P[2]};
              C0[k] -= sk;
              C0[l] -= sl;
              if (C0[k] < 0 || C0[l] < 0 || C0[k] + 1 >= g.n || C0[l] + 1 >= g.n)
                continue;
              Vec3 x00 = g.x(C0[0], C0[1], C0[2]);
              Vec3 center = x00;
              center[k] += 0.5 * h;
              center[l] += 0.5 * h;
              const double akl = a_at(center)[k][l];
              if (akl == 0)
                continue;
              // corner (ik, il) -> unknown index
              int cu[2][2];
              for (int ik = 0; ik < 2; ik++)
                for (int il = 0; il < 2; il++)
                {
                  int Cc[3] = {C0[0], C0[1], C0[2]};
                  Cc[k] += ik;
                  Cc[l] += il;
                  cu[ik][il] = unk(Cc[0], Cc[1], Cc[2]);
                }
              // coefficients of D_k and D_l per corner
              cplx ck[2][2] = {}, cl[2][2] = {};
              for (int il = 0; il < 2; il++)
              {
                Vec3 m = x00;
                m[k] += 0.5 * h;
                m[l] += il * h;
                double bk = b_at(m, k);
                ck[0][il] += 0.5 * (-1.0 / h + 0.5 * I * bk);
                ck[1][il] += 0.5 * (1.0 / h + 0.5 * I * bk);
              }
              for (int ik = 0; ik < 2; ik++)
              {
                Vec3 m = x00;
                m[l] += 0.5 * h;
                m[k] += ik * h;
                double bl = b_at(m, l);
                cl[ik][0] += 0.5 * (-1.0 / h + 0.5 * I * bl);
                cl[ik][1] += 0.5 * (1.0 / h + 0.5 * I * bl);
              }
              const cplx ckp = ck[sk][sl], clp = cl[sk][sl];
              for (int ik = 0; ik < 2; ik++)
                for (int il = 0; il < 2; il++)
                  row.add(cu[ik][il],
                          -akl * (std::conj(clp) * ck[ik][il] + std::conj(ckp) * cl[ik][il]));
            }
    }

    cplx diag = cs.c_clamped(xp, rc) + lambda + I * eps;
    if (sponge_on)
    {
      diag += I * sgn * op.sponge[node];
      op.truncation_diag[u] += I * sgn * op.sponge[node];
    }
    row.add(int(u), diag);

    std::sort(row.e.begin(), row.e.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });
    for (auto &[c, v] : row.e)
    {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        fail(ErrorCode::Numerical, "non-finite operator entry at node " + std::to_string(node));
      A.col.push_back(c);
      A.val.push_back(v);
    }
    A.rowptr[u + 1] = std::int64_t(A.col.size());
  }
  return op;
}

std::vector<cplx> apply_unknowns(const DiscreteOperator &op, const std::vector<cplx> &u)
{
  if (u.size() != op.A.n)
    fail(ErrorCode::InvalidArgument, "apply: dimension mismatch");
  std::vector<cplx> y(u.size());
  op.A.multiply(u.data(), y.data());
  return y;
}

Field apply(const DiscreteOperator &op, const Field &v)
{
  if (v.size() != op.grid->num_nodes())
    fail(ErrorCode::InvalidArgument, "apply: field size does not match the grid");
  return op.grid->scatter(apply_unknowns(op, op.grid->gather(v)));
}

}  // namespace lapkit
