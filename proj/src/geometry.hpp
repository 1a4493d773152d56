// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "common.hpp"

namespace lapkit
{

struct Obstacle
{
  enum class Kind
  {
    None,
    Ball,
    Ellipsoid
  };
  Kind kind = Kind::None;
  Vec3 axes{};  // ball: axes[0] = radius
  Vec3 center{};

  bool empty() const { return kind == Kind::None; }
  // Closed obstacle membership.
  bool contains(const Vec3 &x) const;
  // Level function: < 0 inside, 0 on the boundary.
  double level(const Vec3 &x) const;
  // Boundary point for spherical parameters and the normal pointing out of
  // the exterior domain (i.e. into the obstacle).
  Vec3 boundary_point(double theta, double phi) const;
  Vec3 domain_normal(const Vec3 &p) const;
  // Largest |x| and ||x||_inf over the obstacle.
  double max_radius() const;
  double max_inf_norm() const;
  // Smallest |x| on the obstacle boundary (0 if the obstacle contains the origin's
  // neighbourhood is not implied).
  double min_radius() const;
  std::string describe() const;
};

// "none", "ball:r", "ellipsoid:a,b,c", optionally "@cx,cy,cz".
Obstacle parse_obstacle(const std::string &s);

enum class NodeClass : unsigned char
{
  Interior = 0,
  Origin = 1,     // the node x = 0: an unknown, but in no dyadic shell
  Sponge = 2,     // unknown inside the absorbing layer
  Obstacle = 3,   // Dirichlet, inside the closed obstacle
  Outer = 4       // Dirichlet, on the cube faces
};

struct GridConfig
{
  double h = 0.25;
  double rmax = 8.0;
  double sponge_width = 2.5;
  Obstacle obstacle;
};

class Grid
{
public:
  GridConfig cfg;
  int M = 0;  // nodes per half axis: index i in [0, 2M], x = (i - M) h
  int n = 0;  // 2M + 1
  std::vector<NodeClass> cls;
  std::vector<int> unknown;      // node -> unknown index or -1
  std::vector<std::size_t> node_of;  // unknown -> node
  int populated_lo = 0, populated_hi = 0;  // shells holding at least one node of |x| >= h
  int shell_lo = 0, shell_hi = 0;  // shells used by the norms: 2^j >= 2h, start before the sponge
  std::size_t count[5] = {0, 0, 0, 0, 0};

  double h() const { return cfg.h; }
  std::size_t num_nodes() const { return std::size_t(n) * n * n; }
  std::size_t num_unknowns() const { return node_of.size(); }
  std::size_t index(int i, int j, int k) const { return (std::size_t(i) * n + j) * n + k; }
  void ijk(std::size_t idx, int &i, int &j, int &k) const
  {
    k = int(idx % n);
    j = int((idx / n) % n);
    i = int(idx / (std::size_t(n) * n));
  }
  Vec3 x(int i, int j, int k) const { return {(i - M) * cfg.h, (j - M) * cfg.h, (k - M) * cfg.h}; }
  Vec3 x(std::size_t idx) const
  {
    int i, j, k;
    ijk(idx, i, j, k);
    return x(i, j, k);
  }
  bool is_unknown(std::size_t idx) const { return unknown[idx] >= 0; }
  // Unknown outside the sponge (where every paper norm lives).
  bool in_domain(std::size_t idx) const
  {
    return cls[idx] == NodeClass::Interior || cls[idx] == NodeClass::Origin;
  }
  // Inner edge of the sponge in the sup norm.
  double presponge() const { return cfg.rmax - cfg.sponge_width; }
  // Largest sphere radius whose interpolation stencils stay outside the sponge.
  double max_sphere_radius() const { return presponge() - 1.8 * cfg.h; }

  Field zeros() const { return Field(num_nodes(), cplx(0)); }
  // Node field -> unknown vector and back (Dirichlet nodes read as zero).
  std::vector<cplx> gather(const Field &f) const;
  Field scatter(const std::vector<cplx> &u) const;
};

// floor(log2 r) computed exactly.
int shell_of(double r);

Grid build_grid(const GridConfig &cfg);

struct StarshapedResult
{
  bool ok = true;
  double worst_value = 0;
  std::optional<Vec3> worst_point;
  std::string note;
};
StarshapedResult starshaped_check(const CoefficientSet &cs, const Obstacle &ob, int samples = 64);

// Gauss-Legendre nodes/weights on [-1,1].
void gauss_legendre(int n, std::vector<double> &x, std::vector<double> &w);

// Gauss-Legendre in cos(theta) times uniform phi; exact for harmonics of
// degree <= 2*ntheta - 1.
class SphereQuadrature
{
public:
  double R = 0;
  Vec3 center{};
  std::vector<Vec3> points;
  std::vector<double> weights;
  bool clipped = false;  // nodes inside the obstacle were dropped

  static SphereQuadrature build(const Grid *grid, double R, int degree, Vec3 center = {});
  static int ntheta_for_degree(int degree) { return degree / 2 + 1; }

  template <typename F>
  auto integrate(F &&f) const -> decltype(f(Vec3{}) * 1.0)
  {
    using T = decltype(f(Vec3{}) * 1.0);
    std::vector<T> terms(points.size());
    for (std::size_t q = 0; q < points.size(); q++)
      terms[q] = weights[q] * f(points[q]);
    T s{};
    for (auto &t : terms)
      s += t;
    return s;
  }
  double area() const;
};

// Trilinear interpolation of a node field.
struct Interpolant
{
  std::size_t idx[8];
  double w[8];
};
Interpolant interpolant(const Grid &g, const Vec3 &x);
cplx interpolate(const Grid &g, const Field &f, const Vec3 &x);

}  // namespace lapkit
