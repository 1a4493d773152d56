// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "geometry.hpp"

namespace lapkit
{

struct CsrMatrix
{
  std::size_t n = 0;
  std::vector<std::int64_t> rowptr;
  std::vector<std::int32_t> col;
  std::vector<cplx> val;

  void multiply(const cplx *x, cplx *y) const;
  std::size_t nnz() const { return val.size(); }
  cplx diag(std::size_t i) const;
  // max |A_ij - conj(A_ji)|
  double hermitian_defect() const;
};

// Sponge: absorbing layer plus the outer closure. Robin: outgoing radial
// condition on the faces, no absorption. Dirichlet: v = 0 on the faces.
enum class Truncation
{
  Sponge,
  Dirichlet,
  Robin
};

// How the outer cube faces close the problem.
enum class OuterClosure
{
  Dirichlet,
  Robin  // radial outgoing condition d_n v = (n.xhat)(ik - 1/r) v
};

struct OperatorOptions
{
  Truncation truncation = Truncation::Robin;
  OuterClosure closure = OuterClosure::Robin;
  double sponge_sigma = -1;  // < 0: default 2 sqrt(max(lambda, 1))
  double sponge_power = 3;
  double clamp_radius = -1;  // < 0: h/2
};

std::string to_string(Truncation t);
std::string to_string(OuterClosure c);
Truncation parse_truncation(const std::string &s);
OuterClosure parse_closure(const std::string &s);

class DiscreteOperator
{
public:
  CsrMatrix A;
  double lambda = 0, eps = 0;
  OperatorOptions opts;
  const Grid *grid = nullptr;
  const CoefficientSet *coeffs = nullptr;
  RealField sponge;  // W on nodes
  // Per-unknown diagonal added by the truncation (Robin ghosts, sponge).
  std::vector<cplx> truncation_diag;
  double sigma = 0;
  bool hermitian = false;
  bool robin = false;  // outer faces closed by the Robin ghost rows

  double clamp_radius() const { return opts.clamp_radius < 0 ? 0.5 * grid->h() : opts.clamp_radius; }
  std::size_t size() const { return A.n; }
};

// W(x) = sigma ((||x||_inf - (R_max - w)) / w)^p in the layer, 0 elsewhere.
RealField sponge_profile(const Grid &g, double lambda, const OperatorOptions &opts,
                         double *sigma_out = nullptr);

DiscreteOperator assemble(const CoefficientSet &cs, const Grid &g, double lambda, double eps,
                          const OperatorOptions &opts = {});

// y = A v on the unknowns of v (node field in, node field out, Dirichlet -> 0).
Field apply(const DiscreteOperator &op, const Field &v);
std::vector<cplx> apply_unknowns(const DiscreteOperator &op, const std::vector<cplx> &u);

}  // namespace lapkit
