// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "common.hpp"

namespace lapkit
{

// Radial coefficients: a = alpha(r) xhat xhat^T + beta(r) (I - xhat xhat^T), b = 0, c = c(r).
struct RadialCoefficients
{
  std::function<double(double)> alpha = [](double) { return 1.0; };
  std::function<double(double)> alpha_prime = [](double) { return 0.0; };
  std::function<double(double)> beta = [](double) { return 1.0; };
  std::function<double(double)> c = [](double) { return 0.0; };
};

// Extract radial coefficients from a library set (must be radial and non-magnetic).
RadialCoefficients radial_from(const CoefficientSet &cs);

struct RadialProblem
{
  int n = 3;
  RadialCoefficients coeffs;
  double lambda = 1, eps = 0;
  double r_obs = 0;
  int lmax = 0;
  double r_far = 32;
  int mesh_points = 4000;
  double grading = 0;  // sinh mapping strength, 0 = uniform
};

// One radial mode on its mesh.
struct RadialMode
{
  int l = 0, m = 0;
  std::vector<double> r, s;
  std::vector<cplx> u;
  double eval_s_scale = 0;  // mapping parameters for evaluation
  cplx eval(const RadialProblem &p, double r) const;
  cplx derivative(const RadialProblem &p, double r) const;
};

struct RadialSolution
{
  RadialProblem problem;
  std::vector<RadialMode> modes;
  double tail = 0;  // relative harmonic tail energy of the source
  cplx eval(const Vec3 &x) const;
  // Only for a single l = 0 mode: v(r).
  cplx eval_radial(double r) const;
};

// Mesh in the mapped coordinate.
double radial_map(const RadialProblem &p, double s);
double radial_map_inverse(const RadialProblem &p, double r);

// Solve one mode with a radial source profile g(r).
RadialMode solve_mode(const RadialProblem &p, int l, const std::function<cplx(double)> &g);

// Full solve: f projected on real spherical harmonics up to lmax (n = 3),
// or taken as radial when f_radial is provided (any n).
RadialSolution reduce_and_solve(const RadialProblem &p, const std::function<cplx(const Vec3 &)> &f);
RadialSolution reduce_and_solve_radial(const RadialProblem &p,
                                       const std::function<cplx(double)> &f_radial);

// Real spherical harmonic Y_lm (n = 3), orthonormal on the unit sphere.
double real_sph_harm(int l, int m, const Vec3 &xhat);

// Finite difference weights (Fornberg) for derivatives 0..mmax at x0.
void fd_weights(double x0, const std::vector<double> &nodes, int mmax,
                std::vector<std::vector<double>> &w);

}  // namespace lapkit
