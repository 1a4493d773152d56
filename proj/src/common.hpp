// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lapkit
{

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// Complex samples on every grid node (Dirichlet and sponge nodes included).
using Field = std::vector<cplx>;
using RealField = std::vector<double>;

enum class ErrorCode : int
{
  Ok = 0,
  InvalidArgument = 1,
  Parse = 2,
  Geometry = 3,
  Numerical = 4,
  SolverFailed = 5,
  Io = 6,
  Internal = 7
};

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string &msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &msg)
{
  throw Error(code, msg);
}

inline double dot(const Vec3 &a, const Vec3 &b)
{
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3 &a)
{
  return std::sqrt(dot(a, a));
}
inline Vec3 operator+(const Vec3 &a, const Vec3 &b)
{
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3 &a, const Vec3 &b)
{
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3 &a)
{
  return {s * a[0], s * a[1], s * a[2]};
}
inline Vec3 matvec(const Mat3 &m, const Vec3 &v)
{
  Vec3 r{};
  for (int i = 0; i < 3; i++)
    r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return r;
}
inline Mat3 identity3()
{
  return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
}

// Spectral norm of a symmetric 3x3 matrix and of a general one.
double sym_opnorm(const Mat3 &m);
double opnorm(const Mat3 &m);
// Eigenvalues of a symmetric 3x3 matrix, ascending.
Vec3 sym_eigenvalues(const Mat3 &m);

// Deterministic summation: fixed-size blocks combined by a fixed pairwise tree.
double pairwise_sum(const double *x, std::size_t n);
cplx pairwise_sum(const cplx *x, std::size_t n);

// Shortest round-trip formatting used in every CSV.
std::string fmt_real(double x);

}  // namespace lapkit
