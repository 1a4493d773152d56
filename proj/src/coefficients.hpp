// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "jet.hpp"

namespace lapkit
{

// a(x) and its Cartesian derivatives. d1[k][i][j] = d_k a_ij, and so on.
struct MetricSample
{
  Mat3 a{};
  double d1[3][3][3] = {};
  double d2[3][3][3][3] = {};
  double d3[3][3][3][3][3] = {};
};

// Metrics of the form a = P(r) I + Q(r) x x^T, or a constant symmetric matrix.
struct MetricModel
{
  enum class Kind
  {
    Flat,
    LongRange,  // I + kappa (1+r)^-delta xhat xhat^T
    Radial,     // I + rho(r) (alpha xhat xhat^T + beta (I - xhat xhat^T)), rho = r^2/(1+r^2)^2
    Constant
  };
  Kind kind = Kind::Flat;
  double p1 = 0, p2 = 0;
  Mat3 constant = identity3();
  std::string name = "flat";

  bool is_flat() const { return kind == Kind::Flat; }
  bool is_radial() const { return kind != Kind::Constant; }
  // Radial profiles P, Q as jets in r.
  void profiles(double r, Jet1 &P, Jet1 &Q) const;
  // Radial/tangential eigenvalues alpha(r) = P + Q r^2, beta(r) = P.
  double alpha_r(double r) const;
  double beta_r(double r) const;
  // Radial derivative of alpha(r).
  double alpha_r_prime(double r) const;
  // True when a(x) -> I is not continuous at the origin (xhat xhat^T term).
  bool singular_at_origin() const { return kind == Kind::LongRange && p1 != 0; }
};

// Singular set of a library term.
enum class Singularity
{
  None,
  Origin,
  Axis3  // the x3 axis
};

// Smooth cutoff: 1 on r <= s/2, 0 on r >= s, cubic smoothstep in between.
// s <= 0 means "everything short range" (chi = 1).
double cutoff(double r, double s);
double cutoff_prime(double r, double s);

struct MagneticTerm
{
  enum class Kind
  {
    AharonovBohm,
    AbSphere,
    Affine,  // b = b0 + B x (no singularity)
    Custom
  };
  Kind kind = Kind::Affine;
  double C = 0;
  Vec3 b0{};
  Mat3 B{};
  double split = 0;
  std::function<Vec3(const Vec3 &)> custom;
  std::string name;

  Singularity singularity() const;
  Vec3 value(const Vec3 &x) const;
  // J[l][j] = d_j b_l
  Mat3 jacobian(const Vec3 &x) const;
};

struct ElectricTerm
{
  enum class Kind
  {
    Coulomb,        // C |x|^-alpha
    InverseSquare,  // C |x|^-2
    GaussianWell,   // -C exp(-|x|^2 / w^2)
    RationalWell,   // C (1+|x|^2)^-2
    Custom
  };
  Kind kind = Kind::Coulomb;
  double C = 0, p = 0;
  double split = 0;
  std::function<double(const Vec3 &)> custom;
  std::string name;

  Singularity singularity() const;
  double value(const Vec3 &x) const;
  Vec3 gradient(const Vec3 &x) const;
  bool radial() const { return kind != Kind::Custom; }
};

struct MetricJets
{
  Jet2 ahat, abar, atil;
};

class CoefficientSet
{
public:
  int dim = 3;
  MetricModel metric;
  std::vector<MagneticTerm> magnetic;
  std::vector<ElectricTerm> electric;
  double delta = 0.5;

  // Ellipticity bounds from a fine radial scan of the metric eigenvalues.
  double nu() const;
  double N() const;
  bool fd_fallback() const;  // any custom term present
  bool has_magnetic() const { return !magnetic.empty(); }
  bool is_flat() const { return metric.is_flat(); }
  std::string describe() const;

  MetricSample metric_at(const Vec3 &x, int order = 3) const;
  Mat3 a(const Vec3 &x) const;

  Vec3 b(const Vec3 &x) const;
  Vec3 b_short(const Vec3 &x) const;
  Vec3 b_long(const Vec3 &x) const;
  Mat3 db(const Vec3 &x) const;
  Mat3 db_short(const Vec3 &x) const;
  Mat3 db_long(const Vec3 &x) const;

  double c(const Vec3 &x) const;
  double c_short(const Vec3 &x) const;
  double c_long(const Vec3 &x) const;
  Vec3 grad_c(const Vec3 &x) const;
  Vec3 grad_c_short(const Vec3 &x) const;
  Vec3 grad_c_long(const Vec3 &x) const;

  // Distance to the nearest singular set of any term (inf if none).
  double singular_distance(const Vec3 &x) const;
  // Values clamped on the tube of radius rc around the singular sets.
  double c_clamped(const Vec3 &x, double rc) const;
  Vec3 b_clamped(const Vec3 &x, double rc) const;
  Mat3 db_clamped(const Vec3 &x, double rc) const;
  // Point used to evaluate the metric near its singular origin.
  Vec3 metric_point(const Vec3 &x, double rc) const;

  MetricJets metric_jets(const Vec3 &x) const;

private:
  static Vec3 project(const Vec3 &x, Singularity s, double rc);
  Vec3 b_split(const Vec3 &x, int part) const;
  Mat3 db_split(const Vec3 &x, int part) const;
  double c_split(const Vec3 &x, int part) const;
  Vec3 gc_split(const Vec3 &x, int part) const;
};

// (ahat, abar, atil) at x != 0.
struct DerivedScalars
{
  double ahat, abar, atil;
};
DerivedScalars derived_metric_scalars(const CoefficientSet &cs, const Vec3 &x);
double radial_A_psi(const CoefficientSet &cs, const Vec3 &x, double psi1, double psi2);
// (d_j b_l - d_l b_j) a_lm xhat_m, optionally for one split part.
enum class Part
{
  Full,
  Short,
  Long
};
Vec3 tangential_field(const CoefficientSet &cs, const Vec3 &x, Part part = Part::Full);

// Library parsing: "coulomb(1,1)", "flat", "aharonov_bohm(0.5)", sums with '+'.
MetricModel parse_metric(const std::string &s);
std::vector<MagneticTerm> parse_magnetic(const std::string &s);
std::vector<ElectricTerm> parse_electric(const std::string &s);

MagneticTerm make_aharonov_bohm(double C);
MagneticTerm make_ab_sphere(double C);
MagneticTerm make_affine_magnetic(const Vec3 &b0, const Mat3 &B);
ElectricTerm make_coulomb(double C, double alpha);
ElectricTerm make_inverse_square(double C);
ElectricTerm make_gaussian_well(double C, double w);
ElectricTerm make_rational_well(double C);
MetricModel make_metric_longrange(double kappa, double delta);
MetricModel make_metric_radial(double alpha, double beta);
MetricModel make_metric_constant(const Mat3 &a);

}  // namespace lapkit
