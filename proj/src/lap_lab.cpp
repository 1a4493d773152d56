// SPDX-License-Identifier: Apache-2.0
#include "lap_lab.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>
#include <algorithm>
#include <fmt/format.h>
#include <random>
#include <sstream>

namespace lapkit
{

cplx Source::operator()(const Vec3 &x) const
{
  if (zero)
    return 0.0;
  const Vec3 d = x - center;
  return amplitude * std::exp(-dot(d, d) / (width * width));
}

Source parse_source(const std::string &text)
{
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)))
      s += c;
  Source out;
  out.name = s;
  if (s == "none" || s == "0")
  {
    out.zero = true;
    return out;
  }
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')' || s.substr(0, open) != "gaussian")
    fail(ErrorCode::Parse, "unknown source '" + text + "' (expected gaussian(A,w[,x,y,z]) or none)");
  std::vector<double> args;
  std::stringstream ss(s.substr(open + 1, s.size() - open - 2));
  std::string item;
  while (std::getline(ss, item, ','))
  {
    try
    {
      std::size_t used = 0;
      args.push_back(std::stod(item, &used));
      if (used != item.size())
        throw std::invalid_argument(item);
    }
    catch (const std::exception &)
    {
      fail(ErrorCode::Parse, "bad number '" + item + "' in source '" + text + "'");
    }
  }
  if (args.size() != 2 && args.size() != 5)
    fail(ErrorCode::Parse, "gaussian source takes 2 or 5 arguments");
  if (!(args[1] > 0))
    fail(ErrorCode::InvalidArgument, "gaussian source width must be positive");
  out.amplitude = args[0];
  out.width = args[1];
  if (args.size() == 5)
    out.center = {args[2], args[3], args[4]};
  return out;
}

Field sample_source(const Grid &g, const Source &s)
{
  Field f = g.zeros();
  for (std::size_t node = 0; node < g.num_nodes(); node++)
    if (g.is_unknown(node))
      f[node] = s(g.x(node));
  return f;
}

std::string Problem::describe() const
{
  return fmt::format("{}; h={} rmax={} obstacle={}; f={}", coeffs.describe(), fmt_real(grid.h),
                     fmt_real(grid.rmax), grid.obstacle.describe(), source.name);
}

std::vector<double> default_eps_list(double eps0, int count)
{
  std::vector<double> out;
  for (int k = 0; k < count; k++)
    out.push_back(std::ldexp(eps0, -k));
  return out;
}

double h1_ball_norm(const Field &v, const CoefficientSet &cs, const Grid &g, double R0)
{
  const GradientField gv = magnetic_gradient(v, cs, g);
  const double h3 = g.h() * g.h() * g.h();
  std::vector<double> t;
  for (std::size_t node = 0; node < g.num_nodes(); node++)
    if (g.in_domain(node) && norm(g.x(node)) < R0)
      t.push_back((std::norm(v[node]) + GradientField::sq(gv.g[node])) * h3);
  return std::sqrt(pairwise_sum(t.data(), t.size()));
}

RadiationReport radiation_report(const Field &v, const CoefficientSet &cs, const Grid &g,
                                 double lambda, double eps, double delta, const Thresholds &th)
{
  if (!(lambda > 0))
    fail(ErrorCode::InvalidArgument, "radiation_report needs lambda > 0");
  if (!(delta > 0 && delta <= 1))
    fail(ErrorCode::InvalidArgument, "radiation_report needs delta in (0, 1]");
  const SommerfeldTable t = sommerfeld_deficiency(v, cs, g, lambda, eps, delta);
  RadiationReport r;
  r.radii = t.radii;
  r.D = t.D;
  r.mass = t.mass;
  r.flux = t.flux;
  r.weighted = t.weighted;
  r.weighted_eps = t.weighted_eps;
  if (std::all_of(t.D.begin(), t.D.end(), [](double d) { return d == 0; }))
  {
    r.radiating = true;
    r.verdict = "RADIATING";
    return r;
  }
  // least squares log D = a + p log R
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.radii.size(); i++)
  {
    if (t.radii[i] < th.fit_rmin || !(t.D[i] > 0))
      continue;
    const double x = std::log(t.radii[i]), y = std::log(t.D[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    m++;
  }
  if (m < 3)
  {
    r.verdict = "NO-FIT";
    return r;
  }
  r.fitted = true;
  r.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  r.radiating = r.exponent <= th.radiating_exponent;
  r.verdict = r.radiating ? "RADIATING" : "NOT-RADIATING";
  return r;
}

LapSweepResult lap_sweep(const Problem &p, double lambda, const std::vector<double> &eps_list,
                         double R0, double delta, const Thresholds &th, bool keep_solutions)
{
  if (!(lambda > 0))
    fail(ErrorCode::InvalidArgument, "lap_sweep needs lambda > 0");
  if (eps_list.empty())
    fail(ErrorCode::InvalidArgument, "lap_sweep needs at least one eps");
  for (std::size_t k = 0; k < eps_list.size(); k++)
  {
    if (eps_list[k] == 0)
      fail(ErrorCode::InvalidArgument, "eps list must not contain 0");
    if (k > 0 && !(std::abs(eps_list[k]) < std::abs(eps_list[k - 1])))
      fail(ErrorCode::InvalidArgument, "eps list must decrease toward 0");
    if (k > 0 && (eps_list[k] > 0) != (eps_list[0] > 0))
      fail(ErrorCode::InvalidArgument, "eps list must have one sign");
  }
  const double wavelength = 2 * M_PI / std::sqrt(lambda);
  if (p.grid.h > wavelength / 10 + 1e-12)
    fail(ErrorCode::InvalidArgument,
         fmt::format("h = {} does not resolve the wavelength {} (need h <= wavelength / 10)",
                     fmt_real(p.grid.h), fmt_real(wavelength)));
  const Grid g = build_grid(p.grid);
  LapSweepResult res;
  res.problem = p.describe();
  res.lambda = lambda;
  res.h = g.h();
  res.R0 = R0 > 0 ? R0 : p.grid.rmax / 4;
  const Field f = sample_source(g, p.source);

  Field prev;
  for (double eps : eps_list)
  {
    const DiscreteOperator op = assemble(p.coeffs, g, lambda, eps, p.op);
    SolveResult sr = solve(op, f, p.solve);
    SweepRow row;
    row.eps = eps;
    row.iterations = sr.iterations;
    row.rel_residual = sr.rel_residual;
    row.wall_time = sr.wall_time;
    row.status = to_string(sr.status);
    if (!sr.ok())
    {
      res.rows.push_back(row);
      res.partial = true;
      res.failure = fmt::format("solve at eps = {} did not converge ({})", fmt_real(eps), row.status);
      break;
    }
    row.norms = norm_report(sr.v, f, p.coeffs, g, lambda, eps);
    row.Q = row.norms.Q;
    row.radiation = radiation_report(sr.v, p.coeffs, g, lambda, eps, delta, th);
    const std::size_t nr = row.radiation.radii.size();
    auto avg = [&](std::size_t i) {
      const double R = row.radiation.radii[i];
      return row.radiation.flux[i] / (4 * M_PI * R * R);
    };
    if (nr >= 2)
    {
      row.flux_outer = avg(nr - 1);
      row.flux_inner = avg(nr - 2);
    }
    row.h1_norm = h1_ball_norm(sr.v, p.coeffs, g, res.R0);
    if (!prev.empty())
    {
      Field d(sr.v.size());
      for (std::size_t i = 0; i < d.size(); i++)
        d[i] = sr.v[i] - prev[i];
      row.cauchy = h1_ball_norm(d, p.coeffs, g, res.R0);
    }
    res.rows.push_back(row);
    if (keep_solutions)
      res.solutions.push_back(sr.v);
    prev = std::move(sr.v);
  }

  double qmin = INFINITY, qmax = 0;
  for (const auto &r : res.rows)
    if (!res.partial || r.status == "converged")
    {
      qmin = std::min(qmin, r.Q);
      qmax = std::max(qmax, r.Q);
    }
  res.q_ratio = qmin > 0 && std::isfinite(qmax) ? qmax / qmin : INFINITY;
  res.uniform = !res.partial && res.q_ratio <= th.uniform_ratio;
  bool mono = res.rows.size() >= 2;
  for (std::size_t k = 2; k < res.rows.size(); k++)
    mono = mono && res.rows[k].cauchy < res.rows[k - 1].cauchy;
  res.cauchy = !res.partial && mono &&
               res.rows.back().cauchy <= th.tol_cauchy * res.rows.back().h1_norm;
  res.outgoing = !res.partial && res.rows.back().radiation.radii.size() >= 2 &&
                 res.rows.back().flux_outer >= 0 && res.rows.back().flux_inner >= 0;
  return res;
}

namespace
{

double outer_third_fraction(const Grid &g, const Field &v)
{
  const double cut = 2.0 / 3.0 * g.cfg.rmax;
  std::vector<double> all, outer;
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.is_unknown(node))
      continue;
    const Vec3 x = g.x(node);
    const double m = std::norm(v[node]);
    all.push_back(m);
    if (std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])}) >= cut - 1e-12)
      outer.push_back(m);
  }
  const double s = pairwise_sum(all.data(), all.size());
  return s > 0 ? pairwise_sum(outer.data(), outer.size()) / s : 0.0;
}

}  // namespace

UniquenessReport uniqueness_probe(const Problem &p, double lambda, int cycles, unsigned seed,
                                  const Thresholds &th)
{
  if (!(lambda > 0))
    fail(ErrorCode::InvalidArgument, "uniqueness_probe needs lambda > 0");
  const Grid g = build_grid(p.grid);
  const DiscreteOperator op = assemble(p.coeffs, g, lambda, 0.0, p.op);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<cplx> x0(g.num_unknowns());
  for (auto &z : x0)
    z = cplx(nd(rng), nd(rng));
  const std::vector<cplx> x = homogeneous_descent(op, x0, cycles, p.solve.restart);
  UniquenessReport r;
  r.lambda = lambda;
  r.cycles = cycles;
  const Field v0 = g.scatter(x0), v = g.scatter(x);
  const double y0 = ydot_norm(g, magnitude(v0));
  r.reduction = y0 > 0 ? ydot_norm(g, magnitude(v)) / y0 : 0.0;
  r.outer_fraction = outer_third_fraction(g, v);
  r.trivial_kernel = r.reduction < th.kernel_reduction;
  r.truncation_artifact = !r.trivial_kernel && r.outer_fraction >= th.outer_mass;
  r.verdict = r.trivial_kernel        ? "TRIVIAL-KERNEL"
              : r.truncation_artifact ? "TRUNCATION-ARTIFACT"
                                      : "NEAR-KERNEL";
  return r;
}

namespace
{

using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

SpMat to_eigen(const CsrMatrix &A)
{
  std::vector<Eigen::Triplet<cplx, int>> trip;
  trip.reserve(A.nnz());
  for (std::size_t i = 0; i < A.n; i++)
    for (std::int64_t k = A.rowptr[i]; k < A.rowptr[i + 1]; k++)
      trip.emplace_back(int(i), A.col[k], A.val[k]);
  SpMat M(Eigen::Index(A.n), Eigen::Index(A.n));
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

// Eigenpairs (nu, y) of A near 0 via Lanczos on A^{-1} with full reorthogonalization.
struct Ritz
{
  double nu;
  Eigen::VectorXcd y;
};

std::vector<Ritz> shift_invert_lanczos(const SpMat &A, int steps, bool &ok, int &used)
{
  const Eigen::Index n = A.rows();
  // Sparse LU from UMFPACK; without a magnetic term the matrix is real and the
  // factorization runs in real arithmetic (the real and imaginary parts are solved apart).
  bool real = true;
  for (Eigen::Index k = 0; k < A.nonZeros() && real; k++)
    real = A.valuePtr()[k].imag() == 0;
  // UMFPACK solves read the matrix arrays, so Ar must outlive the factorization.
  Eigen::SparseMatrix<double> Ar;
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu_r;
  Eigen::UmfPackLU<SpMat> lu_c;
  if (real)
  {
    Ar = A.real();
    lu_r.compute(Ar);
  }
  else
    lu_c.compute(A);
  if ((real ? lu_r.info() : lu_c.info()) != Eigen::Success)
    fail(ErrorCode::Numerical, "shift-invert factorization failed (shift on an eigenvalue?)");
  auto inv = [&](const Eigen::VectorXcd &x) -> Eigen::VectorXcd {
    if (!real)
      return lu_c.solve(x);
    const Eigen::VectorXd re = x.real(), im = x.imag();
    Eigen::VectorXcd out = lu_r.solve(re).cast<cplx>();
    if (im.squaredNorm() > 0)
      out += cplx(0, 1) * lu_r.solve(im).cast<cplx>();
    return out;
  };
  steps = int(std::min<Eigen::Index>(steps, n));
  std::vector<Eigen::VectorXcd> V;
  std::vector<double> alpha, beta;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd q(n);
  for (Eigen::Index i = 0; i < n; i++)
    q[i] = cplx(nd(rng), 0.0);
  q.normalize();
  V.push_back(q);
  for (int k = 0; k < steps; k++)
  {
    Eigen::VectorXcd w = inv(V[k]);
    const double a = std::real(V[k].dot(w));
    alpha.push_back(a);
    for (int pass = 0; pass < 2; pass++)
      for (const auto &u : V)
        w -= u * u.dot(w);
    const double b = w.norm();
    if (b < 1e-13 || k + 1 == steps)
      break;
    beta.push_back(b);
    V.push_back(w / b);
  }
  const int m = int(alpha.size());
  used = m;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; i++)
  {
    T(i, i) = alpha[i];
    if (i + 1 < m)
      T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  ok = es.info() == Eigen::Success;
  std::vector<Ritz> out;
  for (int j = 0; j < m; j++)
  {
    const double theta = es.eigenvalues()[j];
    if (std::abs(theta) < 1e-300)
      continue;
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < m; i++)
      y += es.eigenvectors()(i, j) * V[i];
    out.push_back({1.0 / theta, y / y.norm()});
  }
  return out;
}

}  // namespace

EigenProbeResult eigenvalue_probe(const Problem &p, double band_lo, double band_hi,
                                  const std::vector<double> &rmax_list, int nev,
                                  const Thresholds &th)
{
  if (!(band_lo < band_hi))
    fail(ErrorCode::InvalidArgument, "eigenvalue band must satisfy lo < hi");
  if (rmax_list.size() < 2)
    fail(ErrorCode::InvalidArgument, "eigenvalue probe needs at least two R_max values");
  EigenProbeResult res;
  res.band_lo = band_lo;
  res.band_hi = band_hi;
  res.h = p.grid.h;
  const double center = 0.5 * (band_lo + band_hi);
  OperatorOptions oo = p.op;
  oo.truncation = Truncation::Dirichlet;
  std::vector<Grid> grids;
  std::vector<std::vector<Field>> vecs;  // eigenvectors on nodes, ordered like row.values
  for (double rmax : rmax_list)
  {
    GridConfig gc = p.grid;
    gc.rmax = rmax;
    gc.sponge_width = 0;
    grids.push_back(build_grid(gc));
    const Grid &g = grids.back();
    // (L + center) v = (center - lambda) v: eigenvalues nu of the assembly give lambda = center - nu
    const DiscreteOperator op = assemble(p.coeffs, g, center, 0.0, oo);
    const SpMat A = to_eigen(op.A);
    EigenRow row;
    row.rmax = rmax;
    row.unknowns = int(g.num_unknowns());
    const std::vector<Ritz> ritz =
        shift_invert_lanczos(A, std::max(6 * nev, 60), row.converged, row.lanczos_steps);
    std::vector<std::pair<EigenEntry, Field>> found;
    for (const Ritz &r : ritz)
    {
      EigenEntry e;
      e.lambda = center - r.nu;
      if (e.lambda < band_lo || e.lambda > band_hi)
        continue;
      const Eigen::VectorXcd Ay = A * r.y;
      e.residual = (Ay - r.nu * r.y).norm();
      if (e.residual > 1e-6 * (1 + std::abs(r.nu)) * std::sqrt(double(A.rows())))
        continue;  // not converged
      std::vector<cplx> u(r.y.data(), r.y.data() + r.y.size());
      Field v = g.scatter(u);
      e.outer_fraction = outer_third_fraction(g, v);
      found.emplace_back(e, std::move(v));
    }
    std::sort(found.begin(), found.end(), [&](const auto &a, const auto &b) {
      return std::abs(a.first.lambda - center) < std::abs(b.first.lambda - center);
    });
    if (int(found.size()) > nev)
      found.resize(nev);
    std::sort(found.begin(), found.end(),
              [](const auto &a, const auto &b) { return a.first.lambda < b.first.lambda; });
    vecs.emplace_back();
    for (auto &[e, v] : found)
    {
      row.values.push_back(e);
      vecs.back().push_back(std::move(v));
    }
    res.rows.push_back(row);
  }

  // Track each eigenpair into the neighbouring R_max by eigenvector overlap on the
  // common box: the match is the (near-degenerate) cluster whose span captures the
  // largest share of the vector. Nearest-value matching would pair unrelated box
  // modes, whose spectrum gets denser as R_max grows.
  for (std::size_t i = 0; i < res.rows.size(); i++)
  {
    const std::size_t j = i + 1 < res.rows.size() ? i + 1 : i - 1;
    const Grid &gi = grids[i], &gj = grids[j];
    const Grid &gs = gi.M <= gj.M ? gi : gj;  // the smaller box
    std::vector<std::size_t> map_i, map_j;
    for (std::size_t node = 0; node < gs.num_nodes(); node++)
    {
      if (!gs.is_unknown(node))
        continue;
      int a, b, c;
      gs.ijk(node, a, b, c);
      const std::size_t ni = gi.index(a - gs.M + gi.M, b - gs.M + gi.M, c - gs.M + gi.M);
      const std::size_t nj = gj.index(a - gs.M + gj.M, b - gs.M + gj.M, c - gs.M + gj.M);
      if (gi.is_unknown(ni) && gj.is_unknown(nj))
      {
        map_i.push_back(ni);
        map_j.push_back(nj);
      }
    }
    auto restrict = [](const Field &v, const std::vector<std::size_t> &map) {
      Eigen::VectorXcd r(map.size());
      for (std::size_t k = 0; k < map.size(); k++)
        r[k] = v[map[k]];
      return r;
    };
    // clusters of numerically degenerate eigenvalues in row j, orthonormalized on the common box
    const auto &vj = res.rows[j].values;
    std::vector<std::vector<Eigen::VectorXcd>> bases;
    std::vector<double> cluster_lambda;
    for (std::size_t k = 0; k < vj.size();)
    {
      std::size_t e = k + 1;
      while (e < vj.size() && std::abs(vj[e].lambda - vj[k].lambda) <= 1e-8 * (1 + std::abs(vj[k].lambda)))
        e++;
      std::vector<Eigen::VectorXcd> basis;
      for (std::size_t m = k; m < e; m++)
      {
        Eigen::VectorXcd y = restrict(vecs[j][m], map_j);
        for (int pass = 0; pass < 2; pass++)
          for (const auto &q : basis)
            y -= q * q.dot(y);
        if (y.norm() > 1e-8)
          basis.push_back(y / y.norm());
      }
      bases.push_back(std::move(basis));
      cluster_lambda.push_back(vj[k].lambda);
      k = e;
    }
    for (std::size_t k = 0; k < res.rows[i].values.size(); k++)
    {
      auto &e = res.rows[i].values[k];
      const Eigen::VectorXcd x = restrict(vecs[i][k], map_i);
      const double xx = x.squaredNorm();
      double best = 0, lam = NAN;
      for (std::size_t c = 0; c < bases.size(); c++)
      {
        double pr = 0;
        for (const auto &q : bases[c])
          pr += std::norm(q.dot(x));
        pr = xx > 0 ? pr / xx : 0;
        if (pr > best)
        {
          best = pr;
          lam = cluster_lambda[c];
        }
      }
      e.overlap = best;
      const double drift = best >= th.track_overlap
                               ? std::abs(lam - e.lambda) / std::max(std::abs(e.lambda), 1e-12)
                               : INFINITY;
      e.drift = drift;
      e.stable = drift < th.drift;
      const bool interior = e.outer_fraction < th.outer_mass;
      if (e.stable && interior)
      {
        // below 0 this is discrete spectrum, above 0 an embedded candidate
        if (e.lambda > 0)
          res.no_embedded = false;
        res.stable_found = true;
        if (!(drift >= res.best_drift))
        {
          res.best_drift = drift;
          res.stable_lambda = e.lambda;
        }
      }
    }
  }
  res.verdict = res.no_embedded ? "NO-EMBEDDED" : "EMBEDDED-CANDIDATE";
  return res;
}

Field green_field(const Grid &g, double lambda, bool outgoing)
{
  Field v = g.zeros();
  const double k = std::sqrt(lambda) * (outgoing ? 1 : -1);
  for (std::size_t node = 0; node < g.num_nodes(); node++)
  {
    if (!g.is_unknown(node) || g.cls[node] == NodeClass::Origin)
      continue;
    const double r = norm(g.x(node));
    v[node] = std::exp(cplx(0, k * r)) / (4 * M_PI * r);
  }
  return v;
}

}  // namespace lapkit
