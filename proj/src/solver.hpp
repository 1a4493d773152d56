// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "operator.hpp"

namespace lapkit
{

enum class Method
{
  Gmres,
  Bicgstab,
  Lu
};

enum class Precond
{
  None,
  Jacobi,
  Ilu0
};

std::string to_string(Method m);
std::string to_string(Precond p);
Method parse_method(const std::string &s);
Precond parse_precond(const std::string &s);

struct SolveOptions
{
  Method method = Method::Gmres;
  Precond precond = Precond::Jacobi;
  double tol = 1e-8;
  int maxit = 20000;
  int restart = 60;
};

enum class SolveStatus
{
  Converged,
  MaxIterations,
  Breakdown
};
std::string to_string(SolveStatus s);

struct SolveResult
{
  Field v;                 // solution on nodes
  double rel_residual = 0;  // recomputed with one extra apply()
  double est_residual = 0;  // the iteration's own estimate
  int iterations = 0;
  Method method = Method::Gmres;
  SolveStatus status = SolveStatus::Converged;
  double wall_time = 0;
  bool ok() const { return status == SolveStatus::Converged; }
};

// Deterministic vector kernels.
cplx dotc(const std::vector<cplx> &x, const std::vector<cplx> &y);  // sum conj(x) y
double norm2(const std::vector<cplx> &x);

// Krylov/direct solve of op u = f on the unknowns.
SolveResult solve(const DiscreteOperator &op, const Field &f, const SolveOptions &opts);
// Same on raw unknown vectors, with optional initial guess.
SolveResult solve_unknowns(const DiscreteOperator &op, const std::vector<cplx> &b,
                           const SolveOptions &opts, std::vector<cplx> &x);

// Minimum-residual iterate for a homogeneous system starting from x0:
// runs restarted GMRES on A e = -A x0 and returns x0 + e.
std::vector<cplx> homogeneous_descent(const DiscreteOperator &op, const std::vector<cplx> &x0,
                                      int cycles, int restart);

}  // namespace lapkit
