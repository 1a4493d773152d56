// SPDX-License-Identifier: Apache-2.0
#include "common.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

namespace lapkit
{

namespace
{

Eigen::Matrix3d to_eigen(const Mat3 &m)
{
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++)
      e(i, j) = m[i][j];
  return e;
}

constexpr std::size_t kBlock = 256;

template <typename T>
T tree_sum(const T *x, std::size_t n)
{
  if (n <= kBlock)
  {
    T s{};
    for (std::size_t i = 0; i < n; i++)
      s += x[i];
    return s;
  }
  // Split at a block boundary so the tree shape depends only on n.
  std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::size_t mid = (blocks / 2) * kBlock;
  return tree_sum(x, mid) + tree_sum(x + mid, n - mid);
}

}  // namespace

double sym_opnorm(const Mat3 &m)
{
  Vec3 ev = sym_eigenvalues(m);
  return std::max(std::abs(ev[0]), std::abs(ev[2]));
}

double opnorm(const Mat3 &m)
{
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(to_eigen(m));
  return svd.singularValues()(0);
}

Vec3 sym_eigenvalues(const Mat3 &m)
{
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen(m), Eigen::EigenvaluesOnly);
  auto e = es.eigenvalues();
  return {e(0), e(1), e(2)};
}

double pairwise_sum(const double *x, std::size_t n)
{
  return tree_sum(x, n);
}

cplx pairwise_sum(const cplx *x, std::size_t n)
{
  return tree_sum(x, n);
}

std::string fmt_real(double x)
{
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

}  // namespace lapkit
