// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "geometry.hpp"

namespace lapkit
{

using CVec3 = std::array<cplx, 3>;

// Per-node complex vectors; zero on Dirichlet nodes.
struct GradientField
{
  std::vector<CVec3> g;

  static CVec3 radial(const CVec3 &w, const Vec3 &xhat);
  static CVec3 tangential(const CVec3 &w, const Vec3 &xhat);
  static double sq(const CVec3 &w) { return std::norm(w[0]) + std::norm(w[1]) + std::norm(w[2]); }
  static CVec3 metric_image(const Mat3 &a, const CVec3 &w);
};

// Centered differences plus i b v; second-order one-sided next to Dirichlet nodes.
GradientField magnetic_gradient(const Field &v, const CoefficientSet &cs, const Grid &g);

constexpr double kInf = INFINITY;

struct DyadicInfo
{
  int j_min = 0, j_max = 0;
  std::vector<double> shell_values;
  bool used_quadrature = false;
};

// ||{ || |x|^w v ||_{L^q L^r(Omega_j)} }_j ||_{l^p} over the representable shells.
// p, q, r in {1, 2, inf}; q = r uses the node (midpoint) rule, otherwise
// radial bins of width h with sphere quadrature.
double dyadic_norm(const Grid &g, const RealField &mag, double p, double q, double r,
                   double weight_exp, int quad_degree = 32, DyadicInfo *info = nullptr);
RealField magnitude(const Field &v);
RealField magnitude(const GradientField &w);

// Sup-type norms over the discrete radius lattice {m h} plus the dyadic radii.
double ydot_norm(const Grid &g, const RealField &mag);
double xdot_norm(const Grid &g, const Field &v, int quad_degree = 32);
// sum_j 2^{(j+1)/2} ||f||_{L^2(Omega_j)}
double ystar_norm(const Grid &g, const RealField &mag);
// Plain L^2 over the pre-sponge domain with weight |x|^w (origin node skipped when w < 0).
double weighted_l2(const Grid &g, const RealField &mag, double weight_exp);

struct NormReport
{
  double X = 0, Y = 0, Ystar_f = 0, gradY = 0, tangL2 = 0;
  double w3half = 0;       // ||v / |x|^{3/2}||, reported raw
  double w3half_term = 0;  // (n - 3) w3half
  double lambda = 0, eps = 0;
  double lhs = 0, Q = 0;
  bool Q_infinite = false;
  int j_min = 0, j_max = 0;
  struct Mixed
  {
    double p, q, r, w, value;
    std::string label;
  };
  std::vector<Mixed> mixed;
};

NormReport norm_report(const Field &v, const Field &f, const CoefficientSet &cs, const Grid &g,
                       double lambda, double eps, int quad_degree = 32);

struct SommerfeldTable
{
  std::vector<double> radii;
  std::vector<double> D;      // int_{|x|=R} |grad_S v|^2 dS
  std::vector<double> mass;   // int_{|x|=R} |v|^2 dS
  std::vector<double> flux;   // int_{|x|=R} Im(conj v  d_r^b v) dS
  double weighted = 0;        // int |x|^{delta-1} |grad_S v|^2 over the domain
  double weighted_eps = 0;    // int (eps / sqrt(lambda)) |x|^delta |grad_S v|^2
};

// grad^b v - i sqrt(lambda) xhat v on nodes (zero at the origin node).
GradientField sommerfeld_field(const Field &v, const GradientField &gv, const Grid &g,
                               double lambda);
SommerfeldTable sommerfeld_deficiency(const Field &v, const CoefficientSet &cs, const Grid &g,
                                      double lambda, double eps, double delta,
                                      int quad_degree = 32);

// Dyadic radii 2^j with 2h <= 2^j <= the largest pre-sponge sphere.
std::vector<double> dyadic_radii(const Grid &g);

// Sphere integral of a node-derived quantity through trilinear interpolation.
double sphere_integral(const Grid &g, const SphereQuadrature &sq, const RealField &q);
double sphere_integral_field(const Grid &g, const SphereQuadrature &sq, const Field &v,
                             double power = 2);

}  // namespace lapkit
