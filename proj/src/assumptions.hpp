// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "geometry.hpp"

namespace lapkit
{

// One scalar functional of the coefficients. Sup-type entries are maxima over
// the sample set; l1-type entries sum per-shell values over [j_min, j_max] and
// carry a geometric tail estimate for the shells outside that range.
struct Functional
{
  std::string name;
  std::string kind;  // "sup", "l1", "l2", "zero"
  double value = 0;
  double tail = 0;
  bool unbounded = false;
  std::optional<Vec3> witness;
  std::string note;
};

struct AssumptionOptions
{
  int j_min = -6, j_max = 12;
  int radii_per_shell = 12;  // Gauss-Legendre nodes in rho, plus both shell ends
  int directions = 94;       // Fibonacci directions, plus the 6 axis directions
  double tube = -1;          // singular-set exclusion radius, < 0: h/2
  Mat3 rotation = identity3();  // applied to the direction set
};

struct AssumptionReport
{
  int j_min = -6, j_max = 12;
  double delta = 0.5;
  double tube = 0;
  std::size_t samples = 0, excluded = 0;

  Functional kappa_metric, kappa_dyadic, metric_decay;
  Functional kappa_b, K_b;
  Functional kappa_c, c_grad, K_c;
  Functional Z;
  Functional gamma1, gamma2, gamma5, Gamma3, Gamma4;
  Functional beta1, beta2, beta3;
  StarshapedResult starshaped;
  std::string mapping;  // how c and b are mapped onto the lemma splittings

  std::vector<const Functional *> entries() const;
  bool any_unbounded() const;
};

AssumptionReport assumption_report(const CoefficientSet &cs, const Grid &grid,
                                   const AssumptionOptions &opts = {});

}  // namespace lapkit
