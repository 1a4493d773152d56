// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "identities.hpp"
#include "norms.hpp"
#include "solver.hpp"

namespace lapkit
{

// Right-hand side f: "gaussian(A,w)" = A exp(-|x - x0|^2 / w^2), optional center
// "gaussian(A,w,x0,y0,z0)"; "none" is zero.
struct Source
{
  std::string name = "gaussian(1,1)";
  double amplitude = 1, width = 1;
  Vec3 center{};
  bool zero = false;
  cplx operator()(const Vec3 &x) const;
};
Source parse_source(const std::string &s);
// f on the unknown nodes, zero elsewhere.
Field sample_source(const Grid &g, const Source &s);

struct Problem
{
  CoefficientSet coeffs;
  GridConfig grid;
  OperatorOptions op;
  SolveOptions solve;
  Source source;
  std::string describe() const;
};

struct Thresholds
{
  double uniform_ratio = 4;     // max Q / min Q
  double tol_cauchy = 0.25;     // last H^1 difference relative to ||v_last||_{H^1(B_R0)}
  double drift = 1e-2;          // relative eigenvalue drift
  double outer_mass = 0.5;      // fraction in the outer third
  double kernel_reduction = 1e-6;
  double radiating_exponent = -1;
  double fit_rmin = 1;          // radii used in the decay fit
  double track_overlap = 0.5;   // eigenvector overlap needed to follow a value across R_max
};

struct RadiationReport
{
  std::vector<double> radii, D, mass, flux;
  double weighted = 0, weighted_eps = 0;
  double exponent = 0;
  bool fitted = false;
  bool radiating = false;
  std::string verdict;  // RADIATING, NOT-RADIATING, NO-FIT
};

RadiationReport radiation_report(const Field &v, const CoefficientSet &cs, const Grid &g,
                                 double lambda, double eps, double delta,
                                 const Thresholds &th = {});

struct SweepRow
{
  double eps = 0;
  int iterations = 0;
  double rel_residual = 0, wall_time = 0;
  std::string status;
  NormReport norms;
  double Q = 0;
  double flux_outer = 0, flux_inner = 0;  // sphere-averaged Im(conj v d_r v), two largest dyadic radii
  double cauchy = NAN;                    // ||v_k - v_{k-1}||_{H^1(B_R0)}, NaN for the first row
  double h1_norm = 0;                     // ||v_k||_{H^1(B_R0)}
  RadiationReport radiation;
};

struct LapSweepResult
{
  std::string problem;
  double lambda = 0, R0 = 0, h = 0;
  std::vector<SweepRow> rows;
  std::vector<Field> solutions;  // kept when requested, ordered like rows
  double q_ratio = 0;
  bool uniform = false, cauchy = false, outgoing = false;
  bool partial = false;
  std::string failure;
  bool all_pass() const { return !partial && uniform && cauchy && outgoing; }
};

// Geometric sequence eps0 2^{-k}, k < count.
std::vector<double> default_eps_list(double eps0 = 0.4, int count = 5);

LapSweepResult lap_sweep(const Problem &p, double lambda, const std::vector<double> &eps_list,
                         double R0 = -1, double delta = 0.5, const Thresholds &th = {},
                         bool keep_solutions = false);

// H^1 norm over the in-domain nodes of |x| < R0.
double h1_ball_norm(const Field &v, const CoefficientSet &cs, const Grid &g, double R0);

struct UniquenessReport
{
  double lambda = 0;
  double reduction = 0;     // ||v||_Y / ||v0||_Y
  double outer_fraction = 0;  // share of sum |v|^2 in the outer third of the box
  int cycles = 0;
  bool trivial_kernel = false, truncation_artifact = false;
  std::string verdict;  // TRIVIAL-KERNEL, TRUNCATION-ARTIFACT, NEAR-KERNEL
};

UniquenessReport uniqueness_probe(const Problem &p, double lambda, int cycles = 40,
                                  unsigned seed = 12345, const Thresholds &th = {});

struct EigenEntry
{
  double lambda = 0;        // spectral parameter: (L + lambda) v = 0
  double residual = 0;      // ||(L + lambda) v|| / ||v||
  double outer_fraction = 0;
  double overlap = NAN;     // share of the vector captured by its match at the next R_max
  double drift = NAN;       // relative eigenvalue change along that match (inf if untracked)
  bool stable = false;
};

struct EigenRow
{
  double rmax = 0;
  int unknowns = 0, lanczos_steps = 0;
  bool converged = true;
  std::vector<EigenEntry> values;
};

struct EigenProbeResult
{
  double band_lo = 0, band_hi = 0, h = 0;
  std::vector<EigenRow> rows;
  bool no_embedded = true;    // no stable interior eigenvalue with lambda > 0
  bool stable_found = false;  // a stable interior eigenvalue anywhere in the band
  double best_drift = NAN;
  double stable_lambda = NAN;
  std::string verdict;  // NO-EMBEDDED or EMBEDDED-CANDIDATE
};

// Shift-invert Lanczos on the Hermitian eps = 0 Dirichlet assembly (no sponge).
EigenProbeResult eigenvalue_probe(const Problem &p, double band_lo, double band_hi,
                                  const std::vector<double> &rmax_list, int nev = 8,
                                  const Thresholds &th = {});

// Analytic fields e^{+- i sqrt(lambda) r} / (4 pi r) sampled on the domain (0 at the origin).
Field green_field(const Grid &g, double lambda, bool outgoing);

}  // namespace lapkit
