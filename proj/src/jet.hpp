// SPDX-License-Identifier: Apache-2.0
#pragma once

// Small forward-mode derivative types.
//   Jet1: f(r) with f', f'', f''' (one variable, third order).
//   Jet2: f(x) with gradient and Hessian (three variables, second order).

#include <cmath>

#include "common.hpp"

namespace lapkit
{

struct Jet1
{
  double d[4] = {0, 0, 0, 0};

  static Jet1 constant(double c) { return {{c, 0, 0, 0}}; }
  static Jet1 variable(double r) { return {{r, 1, 0, 0}}; }
};

// g(u) given the value and three derivatives of g at u.
inline Jet1 compose(const Jet1 &u, double g0, double g1, double g2, double g3)
{
  const double u1 = u.d[1], u2 = u.d[2], u3 = u.d[3];
  return {{g0, g1 * u1, g2 * u1 * u1 + g1 * u2,
           g3 * u1 * u1 * u1 + 3 * g2 * u1 * u2 + g1 * u3}};
}

inline Jet1 operator+(const Jet1 &a, const Jet1 &b)
{
  return {{a.d[0] + b.d[0], a.d[1] + b.d[1], a.d[2] + b.d[2], a.d[3] + b.d[3]}};
}
inline Jet1 operator-(const Jet1 &a, const Jet1 &b)
{
  return {{a.d[0] - b.d[0], a.d[1] - b.d[1], a.d[2] - b.d[2], a.d[3] - b.d[3]}};
}
inline Jet1 operator*(double s, const Jet1 &a)
{
  return {{s * a.d[0], s * a.d[1], s * a.d[2], s * a.d[3]}};
}
inline Jet1 operator+(double s, const Jet1 &a)
{
  return {{s + a.d[0], a.d[1], a.d[2], a.d[3]}};
}
inline Jet1 operator*(const Jet1 &a, const Jet1 &b)
{
  return {{a.d[0] * b.d[0], a.d[1] * b.d[0] + a.d[0] * b.d[1],
           a.d[2] * b.d[0] + 2 * a.d[1] * b.d[1] + a.d[0] * b.d[2],
           a.d[3] * b.d[0] + 3 * a.d[2] * b.d[1] + 3 * a.d[1] * b.d[2] + a.d[0] * b.d[3]}};
}
inline Jet1 pow(const Jet1 &u, double p)
{
  const double x = u.d[0];
  return compose(u, std::pow(x, p), p * std::pow(x, p - 1), p * (p - 1) * std::pow(x, p - 2),
                 p * (p - 1) * (p - 2) * std::pow(x, p - 3));
}
inline Jet1 recip(const Jet1 &u)
{
  return pow(u, -1.0);
}
inline Jet1 operator/(const Jet1 &a, const Jet1 &b)
{
  return a * recip(b);
}
inline Jet1 exp(const Jet1 &u)
{
  const double e = std::exp(u.d[0]);
  return compose(u, e, e, e, e);
}

struct Jet2
{
  double v = 0;
  Vec3 g{};
  Mat3 H{};

  static Jet2 constant(double c)
  {
    Jet2 j;
    j.v = c;
    return j;
  }
  static Jet2 coord(const Vec3 &x, int k)
  {
    Jet2 j;
    j.v = x[k];
    j.g[k] = 1;
    return j;
  }
};

inline Jet2 operator+(const Jet2 &a, const Jet2 &b)
{
  Jet2 r;
  r.v = a.v + b.v;
  for (int i = 0; i < 3; i++)
  {
    r.g[i] = a.g[i] + b.g[i];
    for (int j = 0; j < 3; j++)
      r.H[i][j] = a.H[i][j] + b.H[i][j];
  }
  return r;
}
inline Jet2 operator*(double s, const Jet2 &a)
{
  Jet2 r;
  r.v = s * a.v;
  for (int i = 0; i < 3; i++)
  {
    r.g[i] = s * a.g[i];
    for (int j = 0; j < 3; j++)
      r.H[i][j] = s * a.H[i][j];
  }
  return r;
}
inline Jet2 operator-(const Jet2 &a, const Jet2 &b)
{
  return a + (-1.0) * b;
}
inline Jet2 operator*(const Jet2 &a, const Jet2 &b)
{
  Jet2 r;
  r.v = a.v * b.v;
  for (int i = 0; i < 3; i++)
  {
    r.g[i] = a.g[i] * b.v + a.v * b.g[i];
    for (int j = 0; j < 3; j++)
      r.H[i][j] = a.H[i][j] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.H[i][j];
  }
  return r;
}
// g(u) from g, g', g'' at u.
inline Jet2 compose(const Jet2 &u, double g0, double g1, double g2)
{
  Jet2 r;
  r.v = g0;
  for (int i = 0; i < 3; i++)
  {
    r.g[i] = g1 * u.g[i];
    for (int j = 0; j < 3; j++)
      r.H[i][j] = g2 * u.g[i] * u.g[j] + g1 * u.H[i][j];
  }
  return r;
}
inline Jet2 sqrt(const Jet2 &u)
{
  const double s = std::sqrt(u.v);
  return compose(u, s, 0.5 / s, -0.25 / (s * u.v));
}
inline Jet2 recip(const Jet2 &u)
{
  const double i = 1.0 / u.v;
  return compose(u, i, -i * i, 2 * i * i * i);
}
inline Jet2 operator/(const Jet2 &a, const Jet2 &b)
{
  return a * recip(b);
}

}  // namespace lapkit
