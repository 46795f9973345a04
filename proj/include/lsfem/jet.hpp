#pragma once

#include "lsfem/core.hpp"

#include <cmath>

namespace lsfem {

/// Value, gradient and Hessian of a scalar function of (x, y), propagated by forward mode.
struct Jet2 {
  double v = 0.0;
  Vec2 g = Vec2::Zero();
  Mat2 H = Mat2::Zero();

  Jet2() = default;
  Jet2(double c) : v(c) {}  // NOLINT(google-explicit-constructor)
  Jet2(double v_, const Vec2& g_, const Mat2& H_) : v(v_), g(g_), H(H_) {}

  static Jet2 variable(double value, int i) {
    Jet2 j(value);
    j.g[i] = 1.0;
    return j;
  }

  Jet2& operator+=(const Jet2& o) { return *this = *this + o; }
  Jet2& operator-=(const Jet2& o) { return *this = *this - o; }
  Jet2& operator*=(const Jet2& o) { return *this = *this * o; }

  friend Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.g + b.g, a.H + b.H}; }
  friend Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.g - b.g, a.H - b.H}; }
  friend Jet2 operator-(const Jet2& a) { return {-a.v, -a.g, -a.H}; }
  friend Jet2 operator*(const Jet2& a, const Jet2& b) {
    const Mat2 cross_term = a.g * b.g.transpose();
    return {a.v * b.v, a.g * b.v + b.g * a.v, a.H * b.v + b.H * a.v + cross_term + cross_term.transpose()};
  }
  friend Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

  /// f(a) given f(a.v), f'(a.v), f''(a.v).
  static Jet2 chain(const Jet2& a, double f, double df, double ddf) {
    return {f, df * a.g, df * a.H + ddf * a.g * a.g.transpose()};
  }

  friend Jet2 reciprocal(const Jet2& a) { return chain(a, 1.0 / a.v, -1.0 / (a.v * a.v), 2.0 / (a.v * a.v * a.v)); }
};

inline Jet2 sin(const Jet2& a) { return Jet2::chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet2 cos(const Jet2& a) { return Jet2::chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.v);
  return Jet2::chain(a, e, e, e);
}
inline Jet2 sqrt(const Jet2& a) {
  const double s = std::sqrt(a.v);
  return Jet2::chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet2 pow(const Jet2& a, double p) {
  return Jet2::chain(a, std::pow(a.v, p), p * std::pow(a.v, p - 1.0), p * (p - 1.0) * std::pow(a.v, p - 2.0));
}

inline Jet2 atan2(const Jet2& y, const Jet2& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  const double ty = x.v / r2, tx = -y.v / r2;
  const double tyy = -2.0 * x.v * y.v / (r2 * r2);
  const double txx = -tyy;
  const double txy = (y.v * y.v - x.v * x.v) / (r2 * r2);
  const Mat2 mixed = y.g * x.g.transpose();
  return {std::atan2(y.v, x.v), ty * y.g + tx * x.g,
          ty * y.H + tx * x.H + tyy * y.g * y.g.transpose() + txx * x.g * x.g.transpose() +
              txy * (mixed + mixed.transpose())};
}

}  // namespace lsfem
