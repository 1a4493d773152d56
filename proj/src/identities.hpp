// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "assumptions.hpp"
#include "norms.hpp"
#include "operator.hpp"

namespace lapkit
{

// Which sign of c the identities assume. OpL: f = (A^b + c + lambda + i eps) v,
// the operator the solver inverts. Paper: f = A^b v - c v + (lambda + i eps) v.
enum class SignConvention
{
  OpL,
  Paper
};
std::string to_string(SignConvention s);
SignConvention parse_sign_convention(const std::string &s);

// Everything the multiplier identities need from (psi, phi) at one point.
struct WeightEval
{
  Mat3 a{};
  double psi1 = 0, psi2 = 0;
  Vec3 grad_psi{};
  Mat3 hess_psi{};
  double Apsi = 0;
  Vec3 grad_Apsi{};
  double phi = 0;
  Vec3 grad_phi{};
  double Apsi_phi = 0;  // A psi + phi
  double A2 = 0;        // regular part of A(A psi + phi)
  Mat3 alpha{};         // alpha_lm
};

// psi = |x|^2 / (2R) inside, |x| outside; phi = -ahat / R inside, 0 outside.
class WeightPair
{
public:
  double R = 1;

  double psi(double r) const { return r <= R ? r * r / (2 * R) : r - 0.5 * R; }
  double psi1(double r) const { return r / std::max(r, R); }
  double psi2(double r) const { return r < R ? 1.0 / R : 0.0; }
  WeightEval eval(const CoefficientSet &cs, const Vec3 &x) const;
  // Density of the singular part of -A(A psi + phi)/2 on |x| = R, times |v|^2.
  double delta_density(const CoefficientSet &cs, const Vec3 &x) const;
};

WeightPair weights_std(double R);

struct MorawetzBreakdown
{
  double R = 0, R_in = 0, R_out = 0, h = 0;
  // volume integrals
  double I_grad = 0, I_grad_alpha = 0, I_grad_phi = 0;
  double I_v = 0, I_v_volume = 0, I_v_potential = 0, I_v_delta = 0;
  double I_eps = 0, I_b = 0, I_f = 0;
  // Re (Q + P) . xhat integrated over the outer and inner spheres
  double flux_out = 0, flux_in = 0;
  double volume_total = 0, residual = 0, normalization = 0;
  double relative() const { return normalization == 0 ? 0 : residual / normalization; }
  bool skipped_shells = false;
};

struct MorawetzOptions
{
  SignConvention convention = SignConvention::OpL;
  double R_out = -1;  // < 0: largest pre-sponge sphere
  double R_in = -1;   // < 0: none without obstacle, obstacle radius + 2h otherwise
  int quad_degree = 48;
};

MorawetzBreakdown morawetz_residual(const Field &v, const Field &f, const CoefficientSet &cs,
                                    const Grid &g, double lambda, double eps,
                                    const WeightPair &w, const MorawetzOptions &opts = {});

// int_{dOmega} Re Q . nu with the Dirichlet trace data (v = 0, grad v = (d_nu v) nu).
struct ObstacleFlux
{
  double integral = 0;
  double max_density = 0;  // largest pointwise value (should be <= 0)
  std::size_t samples = 0;
};
ObstacleFlux obstacle_flux(const Field &v, const CoefficientSet &cs, const Grid &g,
                           const WeightPair &w, int samples = 48);

struct New1Result
{
  double lhs1 = 0, rhs1 = 0, trunc1 = 0;  // eps int|v|^2, Im int f conj v, truncation flux
  double lhs2 = 0, rhs2 = 0, trunc2 = 0;  // int a(grad v, grad v), lambda int|v|^2 - ..., truncation
  double res1 = 0, res2 = 0;              // relative, truncation flux accounted
  double res1_raw = 0, res2_raw = 0;      // relative, paper identity on the truncated box
  double lhs2_centered = 0, res2_centered = 0;  // with the centered gradient instead
};
New1Result identity_new1(const Field &v, const Field &f, const DiscreteOperator &op,
                         SignConvention convention = SignConvention::OpL);

struct HardyResult
{
  double lhs = 0, rhs = 0, ratio = 0;
};
HardyResult hardy_check(const Field &w, const CoefficientSet &cs, const Grid &g, double s);

struct LemmaRow
{
  std::string name;
  bool regime_ok = true;
  double lhs = 0, rhs_structural = 0, ratio = 0, residual = 0, h = 0;
  std::string note;
};

std::vector<LemmaRow> lemma_inequality_suite(const Field &v, const Field &f,
                                             const CoefficientSet &cs, const Grid &g,
                                             double lambda, double eps, double delta,
                                             const AssumptionReport *assumptions = nullptr);

// Analytic pair v = (1 + i) exp(-|x|^2), f = its image under the chosen convention.
void manufactured_gaussian(const CoefficientSet &cs, const Grid &g, double lambda, double eps,
                           SignConvention convention, Field &v, Field &f);

}  // namespace lapkit
