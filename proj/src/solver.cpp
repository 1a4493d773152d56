// SPDX-License-Identifier: Apache-2.0
#include "solver.hpp"

#include <Eigen/SparseLU>
#include <Eigen/Sparse>
#include <chrono>

namespace lapkit
{

std::string to_string(Method m)
{
  switch (m)
  {
    case Method::Gmres:
      return "gmres";
    case Method::Bicgstab:
      return "bicgstab";
    case Method::Lu:
      return "lu";
  }
  return "?";
}

std::string to_string(Precond p)
{
  switch (p)
  {
    case Precond::None:
      return "none";
    case Precond::Jacobi:
      return "jacobi";
    case Precond::Ilu0:
      return "ilu0";
  }
  return "?";
}

std::string to_string(SolveStatus s)
{
  switch (s)
  {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::MaxIterations:
      return "max_iterations";
    case SolveStatus::Breakdown:
      return "breakdown";
  }
  return "?";
}

Method parse_method(const std::string &s)
{
  if (s == "gmres")
    return Method::Gmres;
  if (s == "bicgstab")
    return Method::Bicgstab;
  if (s == "lu")
    return Method::Lu;
  fail(ErrorCode::Parse, "solve.method must be gmres, bicgstab or lu");
}

Precond parse_precond(const std::string &s)
{
  if (s == "none")
    return Precond::None;
  if (s == "jacobi")
    return Precond::Jacobi;
  if (s == "ilu0")
    return Precond::Ilu0;
  fail(ErrorCode::Parse, "solve.precond must be none, jacobi or ilu0");
}

namespace
{

constexpr std::size_t kChunk = 1024;

// Chunk partial sums in index order, then a fixed pairwise tree over chunks.
template <typename F>
cplx chunked_sum(std::size_t n, F &&term)
{
  std::vector<cplx> part((n + kChunk - 1) / kChunk);
  for (std::size_t c = 0; c < part.size(); c++)
  {
    cplx s = 0;
    std::size_t e = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < e; i++)
      s += term(i);
    part[c] = s;
  }
  return pairwise_sum(part.data(), part.size());
}

using Vec = std::vector<cplx>;

void axpy(cplx a, const Vec &x, Vec &y)
{
  for (std::size_t i = 0; i < y.size(); i++)
    y[i] += a * x[i];
}

class Preconditioner
{
public:
  Preconditioner(const CsrMatrix &A, Precond kind) : A_(A), kind_(kind)
  {
    if (kind == Precond::Jacobi)
    {
      inv_diag_.resize(A.n);
      for (std::size_t i = 0; i < A.n; i++)
      {
        cplx d = A.diag(i);
        inv_diag_[i] = d == cplx(0) ? cplx(1) : 1.0 / d;
      }
    }
    else if (kind == Precond::Ilu0)
      factor();
  }

  void apply(const Vec &r, Vec &z) const
  {
    z.resize(r.size());
    switch (kind_)
    {
      case Precond::None:
        z = r;
        return;
      case Precond::Jacobi:
        for (std::size_t i = 0; i < r.size(); i++)
          z[i] = inv_diag_[i] * r[i];
        return;
      case Precond::Ilu0:
      {
        const std::size_t n = A_.n;
        for (std::size_t i = 0; i < n; i++)
        {
          cplx s = r[i];
          for (std::int64_t p = A_.rowptr[i]; p < diag_pos_[i]; p++)
            s -= lu_[p] * z[A_.col[p]];
          z[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;)
        {
          cplx s = z[ii];
          for (std::int64_t p = diag_pos_[ii] + 1; p < A_.rowptr[ii + 1]; p++)
            s -= lu_[p] * z[A_.col[p]];
          z[ii] = s / lu_[diag_pos_[ii]];
        }
        return;
      }
    }
  }

private:
  void factor()
  {
    const std::size_t n = A_.n;
    lu_ = A_.val;
    diag_pos_.assign(n, -1);
    for (std::size_t i = 0; i < n; i++)
      for (std::int64_t p = A_.rowptr[i]; p < A_.rowptr[i + 1]; p++)
        if (std::size_t(A_.col[p]) == i)
          diag_pos_[i] = p;
    std::vector<std::int64_t> where(n, -1);
    for (std::size_t i = 0; i < n; i++)
    {
      if (diag_pos_[i] < 0)
        fail(ErrorCode::Numerical, "ILU(0): missing diagonal entry");
      for (std::int64_t p = A_.rowptr[i]; p < A_.rowptr[i + 1]; p++)
        where[A_.col[p]] = p;
      for (std::int64_t p = A_.rowptr[i]; p < diag_pos_[i]; p++)
      {
        const std::size_t k = A_.col[p];
        lu_[p] /= lu_[diag_pos_[k]];
        for (std::int64_t q = diag_pos_[k] + 1; q < A_.rowptr[k + 1]; q++)
        {
          std::int64_t t = where[A_.col[q]];
          if (t >= 0)
            lu_[t] -= lu_[p] * lu_[q];
        }
      }
      for (std::int64_t p = A_.rowptr[i]; p < A_.rowptr[i + 1]; p++)
        where[A_.col[p]] = -1;
      if (lu_[diag_pos_[i]] == cplx(0))
        fail(ErrorCode::Numerical, "ILU(0): zero pivot");
    }
  }

  const CsrMatrix &A_;
  Precond kind_;
  Vec inv_diag_;
  Vec lu_;
  std::vector<std::int64_t> diag_pos_;
};

struct IterOut
{
  int iterations = 0;
  double est = 0;
  SolveStatus status = SolveStatus::Converged;
};

// Right-preconditioned restarted GMRES with Givens rotations.
IterOut gmres(const CsrMatrix &A, const Preconditioner &M, const Vec &b, Vec &x, double tol,
              int maxit, int m)
{
  IterOut out;
  const std::size_t n = b.size();
  const double bnorm = norm2(b);
  if (bnorm == 0)
  {
    std::fill(x.begin(), x.end(), cplx(0));
    return out;
  }
  std::vector<Vec> V(m + 1, Vec(n));
  std::vector<std::vector<cplx>> H(m + 1, std::vector<cplx>(m, 0));
  std::vector<cplx> cs(m), sn(m), g(m + 1);
  Vec r(n), w(n), z(n);
  int total = 0;
  while (true)
  {
    A.multiply(x.data(), r.data());
    for (std::size_t i = 0; i < n; i++)
      r[i] = b[i] - r[i];
    double beta = norm2(r);
    out.est = beta / bnorm;
    if (out.est <= tol)
      break;
    if (total >= maxit)
    {
      out.status = SolveStatus::MaxIterations;
      break;
    }
    for (std::size_t i = 0; i < n; i++)
      V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), cplx(0));
    g[0] = beta;
    int j = 0;
    for (; j < m && total < maxit; j++, total++)
    {
      M.apply(V[j], z);
      A.multiply(z.data(), w.data());
      for (int i = 0; i <= j; i++)
      {
        H[i][j] = dotc(V[i], w);
        axpy(-H[i][j], V[i], w);
      }
      double hn = norm2(w);
      H[j + 1][j] = hn;
      for (int i = 0; i < j; i++)
      {
        cplx t = std::conj(cs[i]) * H[i][j] + std::conj(sn[i]) * H[i + 1][j];
        H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
        H[i][j] = t;
      }
      double den = std::hypot(std::abs(H[j][j]), hn);
      if (den == 0)
      {
        out.status = SolveStatus::Breakdown;
        break;
      }
      cs[j] = H[j][j] / den;
      sn[j] = hn / den;
      H[j][j] = den;
      H[j + 1][j] = 0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = std::conj(cs[j]) * g[j];
      if (hn != 0)
        for (std::size_t i = 0; i < n; i++)
          V[j + 1][i] = w[i] / hn;
      if (std::abs(g[j + 1]) / bnorm <= tol || hn == 0)
      {
        j++;
        total++;
        break;
      }
    }
    // back substitution and update
    std::vector<cplx> y(j);
    for (int i = j - 1; i >= 0; i--)
    {
      cplx s = g[i];
      for (int k = i + 1; k < j; k++)
        s -= H[i][k] * y[k];
      y[i] = s / H[i][i];
    }
    std::fill(w.begin(), w.end(), cplx(0));
    for (int i = 0; i < j; i++)
      axpy(y[i], V[i], w);
    M.apply(w, z);
    for (std::size_t i = 0; i < n; i++)
      x[i] += z[i];
    if (out.status == SolveStatus::Breakdown)
      break;
  }
  out.iterations = total;
  return out;
}

// Right-preconditioned BiCGStab; restarts from the true residual on stagnation.
IterOut bicgstab(const CsrMatrix &A, const Preconditioner &M, const Vec &b, Vec &x, double tol,
                 int maxit)
{
  IterOut out;
  const std::size_t n = b.size();
  const double bnorm = norm2(b);
  if (bnorm == 0)
  {
    std::fill(x.begin(), x.end(), cplx(0));
    return out;
  }
  Vec r(n), rhat(n), p(n), v(n), s(n), t(n), phat(n), shat(n);
  int it = 0;
  int restarts = 0;
  while (true)
  {
    A.multiply(x.data(), r.data());
    for (std::size_t i = 0; i < n; i++)
      r[i] = b[i] - r[i];
    out.est = norm2(r) / bnorm;
    if (out.est <= tol)
      break;
    if (it >= maxit || restarts > 50)
    {
      out.status = SolveStatus::MaxIterations;
      break;
    }
    restarts++;
    rhat = r;
    cplx rho = 1, alpha = 1, omega = 1;
    std::fill(p.begin(), p.end(), cplx(0));
    std::fill(v.begin(), v.end(), cplx(0));
    bool breakdown = false;
    for (; it < maxit; it++)
    {
      cplx rho1 = dotc(rhat, r);
      if (std::abs(rho1) < 1e-300)
      {
        breakdown = true;
        break;
      }
      cplx beta = (rho1 / rho) * (alpha / omega);
      for (std::size_t i = 0; i < n; i++)
        p[i] = r[i] + beta * (p[i] - omega * v[i]);
      M.apply(p, phat);
      A.multiply(phat.data(), v.data());
      cplx den = dotc(rhat, v);
      if (std::abs(den) < 1e-300)
      {
        breakdown = true;
        break;
      }
      alpha = rho1 / den;
      for (std::size_t i = 0; i < n; i++)
        s[i] = r[i] - alpha * v[i];
      if (norm2(s) / bnorm <= tol)
      {
        axpy(alpha, phat, x);
        it++;
        break;
      }
      M.apply(s, shat);
      A.multiply(shat.data(), t.data());
      double tt = std::real(dotc(t, t));
      omega = tt > 0 ? dotc(t, s) / tt : cplx(0);
      for (std::size_t i = 0; i < n; i++)
      {
        x[i] += alpha * phat[i] + omega * shat[i];
        r[i] = s[i] - omega * t[i];
      }
      rho = rho1;
      if (norm2(r) / bnorm <= tol)
      {
        it++;
        break;
      }
      if (omega == cplx(0))
      {
        breakdown = true;
        it++;
        break;
      }
    }
    if (breakdown && restarts > 50)
    {
      out.status = SolveStatus::Breakdown;
      break;
    }
  }
  out.iterations = it;
  return out;
}

IterOut direct_lu(const CsrMatrix &A, const Vec &b, Vec &x)
{
  using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;
  std::vector<Eigen::Triplet<cplx, int>> trip;
  trip.reserve(A.nnz());
  for (std::size_t i = 0; i < A.n; i++)
    for (std::int64_t p = A.rowptr[i]; p < A.rowptr[i + 1]; p++)
      trip.emplace_back(int(i), A.col[p], A.val[p]);
  SpMat S(int(A.n), int(A.n));
  S.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(S);
  IterOut out;
  if (lu.info() != Eigen::Success)
  {
    out.status = SolveStatus::Breakdown;
    return out;
  }
  Eigen::Map<const Eigen::VectorXcd> bb(b.data(), Eigen::Index(b.size()));
  Eigen::VectorXcd sol = lu.solve(bb);
  for (std::size_t i = 0; i < x.size(); i++)
    x[i] = sol(Eigen::Index(i));
  out.iterations = 1;
  return out;
}

}  // namespace

cplx dotc(const std::vector<cplx> &x, const std::vector<cplx> &y)
{
  return chunked_sum(x.size(), [&](std::size_t i) { return std::conj(x[i]) * y[i]; });
}

double norm2(const std::vector<cplx> &x)
{
  return std::sqrt(
      chunked_sum(x.size(), [&](std::size_t i) { return cplx(std::norm(x[i]), 0); }).real());
}

constexpr std::size_t kMaxDirect = 40 * 40 * 40;

SolveResult solve_unknowns(const DiscreteOperator &op, const std::vector<cplx> &b,
                           const SolveOptions &opts, std::vector<cplx> &x)
{
  auto t0 = std::chrono::steady_clock::now();
  for (auto &v : b)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      fail(ErrorCode::InvalidArgument, "solve: right-hand side is not finite");
  SolveResult res;
  res.method = opts.method;
  x.resize(b.size(), cplx(0));
  IterOut it;
  if (opts.method == Method::Lu)
  {
    if (op.A.n > kMaxDirect)
      fail(ErrorCode::InvalidArgument, "direct LU is limited to grids of at most 40^3 unknowns");
    it = direct_lu(op.A, b, x);
  }
  else
  {
    Preconditioner M(op.A, opts.precond);
    it = opts.method == Method::Gmres
             ? gmres(op.A, M, b, x, opts.tol, opts.maxit, std::max(1, opts.restart))
             : bicgstab(op.A, M, b, x, opts.tol, opts.maxit);
  }
  res.iterations = it.iterations;
  res.status = it.status;
  res.est_residual = it.est;
  std::vector<cplx> r(b.size());
  op.A.multiply(x.data(), r.data());
  for (std::size_t i = 0; i < r.size(); i++)
    r[i] -= b[i];
  double bn = norm2(b);
  res.rel_residual = bn > 0 ? norm2(r) / bn : norm2(r);
  if (opts.method == Method::Lu && res.status == SolveStatus::Converged)
    res.est_residual = res.rel_residual;
  if (res.status == SolveStatus::Converged && res.rel_residual > opts.tol * 1.1 && bn > 0)
    res.status = SolveStatus::MaxIterations;
  res.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

SolveResult solve(const DiscreteOperator &op, const Field &f, const SolveOptions &opts)
{
  const Grid &g = *op.grid;
  if (f.size() != g.num_nodes())
    fail(ErrorCode::InvalidArgument, "solve: field size does not match the grid");
  std::vector<cplx> b = g.gather(f), x(b.size(), cplx(0));
  SolveResult res = solve_unknowns(op, b, opts, x);
  res.v = g.scatter(x);
  return res;
}

std::vector<cplx> homogeneous_descent(const DiscreteOperator &op, const std::vector<cplx> &x0,
                                      int cycles, int restart)
{
  std::vector<cplx> rhs(x0.size());
  op.A.multiply(x0.data(), rhs.data());
  for (auto &v : rhs)
    v = -v;
  std::vector<cplx> e(x0.size(), cplx(0));
  Preconditioner M(op.A, Precond::Jacobi);
  gmres(op.A, M, rhs, e, 1e-14, cycles * restart, restart);
  std::vector<cplx> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); i++)
    out[i] = x0[i] + e[i];
  return out;
}

}  // namespace lapkit
