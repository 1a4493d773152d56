// SPDX-License-Identifier: Apache-2.0
#include "assumptions.hpp"

#include <algorithm>
#include <cmath>

namespace lapkit
{

namespace
{

// Shell values below this are rounding noise (e.g. cancelling split parts).
constexpr double kFloor = 1e-12;

Mat3 to_mat(const double m[3][3])
{
  Mat3 r;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++)
      r[i][j] = m[i][j];
  return r;
}

// Quantities sampled at every point; each gets a per-shell angular sup
// profile over the radial nodes.
enum Q
{
  Ca,         // |a-I| + r|a'| + r^2|a''| + r^3|a'''|
  Ca1,        // |a-I| + r|a'|
  Ca1Decay,   // <x>^delta (|a-I| + r|a'|)
  DbS2,       // r^2 |dbhat_S|
  DbL,        // <x>^(delta+1) |dbhat_L|
  CS2,        // r^2 |c_S|
  CSneg,      // r^2 (c_S)_-
  CSrad,      // r^2 [d_r(r c_S)]_+
  CSgrad,     // r^3 |grad c_S|
  CL,         // <x>^delta |c_L|
  ZDb,        // r |dbhat_L|
  ZC,         // r <x>^-1 |c_L|
  G1,         // r ([d_r(r c1)]_+ + c1_- + |a-I|(r|grad c1| + |c1|)), c1 = c_S
  C4neg,      // (c_L)_-
  C4abs,      // |c_L|
  B1,         // r^(3/2) |dbhat_S|
  NQ
};

struct ShellData
{
  bool populated = false;
  double sup[NQ] = {};
  Vec3 arg[NQ] = {};
  double l1[NQ] = {};  // int sup_theta g d rho
  double l2[NQ] = {};  // (int sup_theta g^2 d rho)^(1/2)
  bool nonfinite[NQ] = {};
  Vec3 nonfinite_at[NQ] = {};
};

std::vector<Vec3> direction_set(int nfib, const Mat3 &rot)
{
  std::vector<Vec3> d = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < nfib; i++)
  {
    double z = 1.0 - (2.0 * i + 1.0) / nfib;
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    d.push_back({s * std::cos(golden * i), s * std::sin(golden * i), z});
  }
  for (auto &v : d)
    v = matvec(rot, v);
  return d;
}

void sample_point(const CoefficientSet &cs, const Vec3 &x, double delta, double *q)
{
  const double r = norm(x);
  const double jx = std::sqrt(1.0 + r * r);
  const Vec3 xh = (1.0 / r) * x;

  const MetricSample ms = cs.metric_at(x, 3);
  Mat3 amI = ms.a;
  for (int i = 0; i < 3; i++)
    amI[i][i] -= 1.0;
  const double aI = sym_opnorm(amI);
  double a1 = 0, a2 = 0, a3 = 0;
  for (int k = 0; k < 3; k++)
  {
    a1 += sym_opnorm(to_mat(ms.d1[k]));
    for (int l = k; l < 3; l++)
    {
      a2 += sym_opnorm(to_mat(ms.d2[k][l]));
      for (int m = l; m < 3; m++)
        a3 += sym_opnorm(to_mat(ms.d3[k][l][m]));
    }
  }
  q[Ca] = aI + r * a1 + r * r * a2 + r * r * r * a3;
  q[Ca1] = aI + r * a1;
  q[Ca1Decay] = std::pow(jx, delta) * q[Ca1];

  const double dbS = norm(tangential_field(cs, x, Part::Short));
  const double dbL = norm(tangential_field(cs, x, Part::Long));
  q[DbS2] = r * r * dbS;
  q[DbL] = std::pow(jx, delta + 1) * dbL;
  q[ZDb] = r * dbL;
  q[B1] = std::pow(r, 1.5) * dbS;

  const double cS = cs.c_short(x), cL = cs.c_long(x);
  const Vec3 gS = cs.grad_c_short(x);
  const double drS = cS + r * dot(xh, gS);  // d_r (r c_S)
  q[CS2] = r * r * std::abs(cS);
  q[CSneg] = r * r * std::max(0.0, -cS);
  q[CSrad] = r * r * std::max(0.0, drS);
  q[CSgrad] = r * r * r * norm(gS);
  q[CL] = std::pow(jx, delta) * std::abs(cL);
  q[ZC] = r / jx * std::abs(cL);
  q[G1] = r * (std::max(0.0, drS) + std::max(0.0, -cS) + aI * (r * norm(gS) + std::abs(cS)));
  q[C4neg] = std::max(0.0, -cL);
  q[C4abs] = std::abs(cL);
}

Functional sup_functional(const std::string &name, const std::vector<ShellData> &sh, int j0,
                          std::initializer_list<int> qs)
{
  Functional f;
  f.name = name;
  f.kind = "sup";
  int best_shell = -1;
  std::vector<double> shell_sup(sh.size(), 0.0);
  for (std::size_t s = 0; s < sh.size(); s++)
  {
    if (!sh[s].populated)
      continue;
    for (int q : qs)
    {
      if (sh[s].nonfinite[q])
      {
        f.unbounded = true;
        f.witness = sh[s].nonfinite_at[q];
        f.note = "non-finite coefficient value";
        f.value = INFINITY;
        return f;
      }
      if (sh[s].sup[q] > shell_sup[s])
        shell_sup[s] = sh[s].sup[q];
      if (sh[s].sup[q] > f.value)
      {
        f.value = sh[s].sup[q];
        f.witness = sh[s].arg[q];
        best_shell = int(s);
      }
    }
  }
  // A maximum sitting on an edge shell and still growing outward has no
  // certified bound.
  if (best_shell >= 0 && f.value > kFloor)
  {
    int lo = 0, hi = int(sh.size()) - 1;
    while (lo < hi && !sh[lo].populated)
      lo++;
    while (hi > lo && !sh[hi].populated)
      hi--;
    auto growing = [&](int edge, int inner) {
      return edge == best_shell && inner != edge && shell_sup[edge] > 1.05 * shell_sup[inner];
    };
    if (growing(lo, lo + 1) || growing(hi, hi - 1))
    {
      f.unbounded = true;
      f.note = "supremum grows toward shell " + std::to_string(j0 + best_shell);
    }
  }
  return f;
}

// l^p sum (p = 1 or 2) of per-shell values with geometric tail estimates.
Functional sum_functional(const std::string &name, const std::vector<double> &vals,
                          const std::vector<Vec3> &args, const std::vector<bool> &populated,
                          int p, int j0)
{
  Functional f;
  f.name = name;
  f.kind = p == 1 ? "l1" : "l2";
  int lo = 0, hi = int(vals.size()) - 1;
  while (lo < hi && !populated[lo])
    lo++;
  while (hi > lo && !populated[hi])
    hi--;
  double best = -1;
  std::vector<double> terms;
  for (int s = lo; s <= hi; s++)
  {
    if (!std::isfinite(vals[s]))
    {
      f.unbounded = true;
      f.value = INFINITY;
      f.witness = args[s];
      f.note = "non-finite coefficient value";
      return f;
    }
    terms.push_back(p == 1 ? vals[s] : vals[s] * vals[s]);
    if (vals[s] > best)
    {
      best = vals[s];
      f.witness = args[s];
    }
  }
  double sum = pairwise_sum(terms.data(), terms.size());
  double tail = 0;
  auto edge_tail = [&](int edge, int next) {
    double se = vals[edge], sn = vals[next];
    if (se <= kFloor)
      return;
    if (sn <= kFloor)
    {
      tail += p == 1 ? se : se * se;
      return;
    }
    double qv = se / sn;
    if (qv >= 0.9)
    {
      f.unbounded = true;
      f.witness = args[edge];
      f.note = "shell values do not decay beyond shell " + std::to_string(j0 + edge);
      return;
    }
    double qp = p == 1 ? qv : qv * qv;
    tail += (p == 1 ? se : se * se) * qp / (1 - qp);
  };
  if (hi > lo)
  {
    edge_tail(lo, lo + 1);
    edge_tail(hi, hi - 1);
  }
  if (p == 1)
  {
    f.value = sum;
    f.tail = tail;
  }
  else
  {
    f.value = std::sqrt(sum);
    f.tail = std::sqrt(sum + tail) - f.value;
  }
  // An unbounded entry keeps the truncated sum as its value.
  return f;
}

Functional zero_functional(const std::string &name, const std::string &note)
{
  Functional f;
  f.name = name;
  f.kind = "zero";
  f.note = note;
  return f;
}

Functional combine_sum(const std::string &name, const Functional &a, const Functional &b)
{
  Functional f;
  f.name = name;
  f.kind = a.kind;
  f.value = a.value + b.value;
  f.tail = a.tail + b.tail;
  f.unbounded = a.unbounded || b.unbounded;
  f.witness = a.unbounded ? a.witness : (b.unbounded ? b.witness : (a.value >= b.value ? a.witness : b.witness));
  f.note = a.note.empty() ? b.note : a.note;
  return f;
}

}  // namespace

std::vector<const Functional *> AssumptionReport::entries() const
{
  return {&kappa_metric, &kappa_dyadic, &metric_decay, &kappa_b, &K_b, &kappa_c, &c_grad,
          &K_c,          &Z,            &gamma1,       &gamma2,  &gamma5, &Gamma3, &Gamma4,
          &beta1,        &beta2,        &beta3};
}

bool AssumptionReport::any_unbounded() const
{
  for (auto *e : entries())
    if (e->unbounded)
      return true;
  return false;
}

AssumptionReport assumption_report(const CoefficientSet &cs, const Grid &grid,
                                   const AssumptionOptions &opts)
{
  if (opts.j_max < opts.j_min)
    fail(ErrorCode::InvalidArgument, "assumption_report: empty shell range");
  if (opts.radii_per_shell < 2 || opts.directions < 1)
    fail(ErrorCode::InvalidArgument, "assumption_report: sample set too small");
  AssumptionReport rep;
  rep.j_min = opts.j_min;
  rep.j_max = opts.j_max;
  rep.delta = cs.delta;
  rep.tube = opts.tube < 0 ? 0.5 * grid.h() : opts.tube;
  const Obstacle &ob = grid.cfg.obstacle;

  const auto dirs = direction_set(opts.directions, opts.rotation);
  std::vector<double> gx, gw;
  gauss_legendre(opts.radii_per_shell, gx, gw);

  const int nsh = opts.j_max - opts.j_min + 1;
  std::vector<ShellData> sh(nsh);
  std::vector<double> prof(dirs.size() * NQ);
  for (int s = 0; s < nsh; s++)
  {
    const double r0 = std::ldexp(1.0, opts.j_min + s), r1 = 2 * r0;
    ShellData &d = sh[s];
    // radial nodes: both ends (weight 0) and the Gauss-Legendre interior nodes
    std::vector<double> rho{r0, r1 * (1 - 1e-12)}, wr{0, 0};
    for (int q = 0; q < opts.radii_per_shell; q++)
    {
      rho.push_back(r0 + 0.5 * (gx[q] + 1) * (r1 - r0));
      wr.push_back(0.5 * gw[q] * (r1 - r0));
    }
    std::vector<double> l1(NQ, 0.0), l2(NQ, 0.0);
    for (std::size_t k = 0; k < rho.size(); k++)
    {
      double msup[NQ] = {};
      bool any = false;
      for (const Vec3 &dir : dirs)
      {
        const Vec3 x = rho[k] * dir;
        if (!ob.empty() && ob.contains(x))
          continue;
        rep.samples++;
        if (cs.singular_distance(x) < rep.tube)
        {
          rep.excluded++;
          continue;
        }
        any = true;
        if (!d.populated)
        {
          d.populated = true;
          for (int i = 0; i < NQ; i++)
            d.arg[i] = x;
        }
        double q[NQ];
        sample_point(cs, x, cs.delta, q);
        for (int i = 0; i < NQ; i++)
        {
          if (!std::isfinite(q[i]))
          {
            if (!d.nonfinite[i])
            {
              d.nonfinite[i] = true;
              d.nonfinite_at[i] = x;
            }
            continue;
          }
          msup[i] = std::max(msup[i], q[i]);
          if (q[i] > d.sup[i])
          {
            d.sup[i] = q[i];
            d.arg[i] = x;
          }
        }
      }
      if (!any)
        continue;
      for (int i = 0; i < NQ; i++)
      {
        l1[i] += wr[k] * msup[i];
        l2[i] += wr[k] * msup[i] * msup[i];
      }
    }
    for (int i = 0; i < NQ; i++)
    {
      d.l1[i] = l1[i];
      d.l2[i] = std::sqrt(l2[i]);
    }
  }

  std::vector<bool> populated(nsh);
  for (int s = 0; s < nsh; s++)
    populated[s] = sh[s].populated;
  auto shell_vals = [&](int q, int mode) {
    std::vector<double> v(nsh);
    for (int s = 0; s < nsh; s++)
      v[s] = sh[s].nonfinite[q] ? INFINITY : (mode == 0 ? sh[s].sup[q] : mode == 1 ? sh[s].l1[q] : sh[s].l2[q]);
    return v;
  };
  auto shell_args = [&](int q) {
    std::vector<Vec3> a(nsh);
    for (int s = 0; s < nsh; s++)
      a[s] = sh[s].nonfinite[q] ? sh[s].nonfinite_at[q] : sh[s].arg[q];
    return a;
  };
  auto l1_sup = [&](const std::string &name, int q) {
    return sum_functional(name, shell_vals(q, 0), shell_args(q), populated, 1, opts.j_min);
  };
  const int j0 = opts.j_min;

  rep.kappa_metric = sup_functional("kappa_metric", sh, j0, {Ca});
  rep.kappa_dyadic = l1_sup("kappa_dyadic", Ca1);
  rep.metric_decay = l1_sup("metric_decay", Ca1Decay);
  rep.kappa_b = l1_sup("kappa_b", DbS2);
  if (rep.kappa_b.note.empty())
    rep.kappa_b.note = "l1 over shells (n = 3 form)";
  rep.K_b = sup_functional("K_b", sh, j0, {DbL});
  rep.kappa_c = sup_functional("kappa_c", sh, j0, {CS2, CSneg, CSrad});
  rep.c_grad = sup_functional("c_grad", sh, j0, {CSgrad});
  rep.K_c = sup_functional("K_c", sh, j0, {CL});
  rep.Z = combine_sum("Z", l1_sup("Z_b", ZDb), l1_sup("Z_c", ZC));

  rep.gamma1 = sum_functional("gamma1", shell_vals(G1, 1), shell_args(G1), populated, 1, j0);
  rep.gamma2 = zero_functional("gamma2", "c2 = 0");
  rep.gamma5 = zero_functional("gamma5", "c5 = 0");
  rep.Gamma3 = zero_functional("Gamma3", "c3 = 0");
  {
    Functional neg = l1_sup("Gamma4_neg", C4neg);
    Functional abs = l1_sup("Gamma4_abs", C4abs);
    Functional sq = abs;
    sq.value = abs.value * abs.value;
    sq.tail = (abs.value + abs.tail) * (abs.value + abs.tail) - sq.value;
    rep.Gamma4 = combine_sum("Gamma4", neg, sq);
  }
  rep.beta1 = sum_functional("beta1", shell_vals(B1, 2), shell_args(B1), populated, 1, j0);
  rep.beta2 = zero_functional("beta2", "b_II = 0");
  rep.beta3 = l1_sup("beta3", ZDb);
  rep.mapping = "c1 = c_S, c4 = c_L, c2 = c3 = c5 = 0; b_I = b_S, b_III = b_L, b_II = 0";

  rep.starshaped = starshaped_check(cs, ob);
  return rep;
}

}  // namespace lapkit
