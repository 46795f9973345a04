#pragma once

#include "lsfem/core.hpp"

#include <array>
#include <vector>

namespace lsfem {

/// Scaled monomials xi^a eta^b, a + b <= degree, with xi = (x - center) / scale.
/// Ordered by total degree, then by decreasing power of xi.
class MonomialBasis {
 public:
  static constexpr int kMaxDegree = 12;

  MonomialBasis() = default;
  MonomialBasis(int degree, Vec2 center, double scale) : degree_(degree), center_(center), scale_(scale) {
    if (degree < 0 || degree > kMaxDegree) throw ConfigError("monomial degree out of range");
    for (int d = 0; d <= degree; ++d) {
      for (int b = 0; b <= d; ++b) powers_.push_back({d - b, b});
    }
  }

  static int dimension(int degree) { return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2; }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(powers_.size()); }
  const Vec2& center() const { return center_; }
  double scale() const { return scale_; }
  std::array<int, 2> power(int i) const { return powers_[i]; }

  Vec2 local(const Vec2& x) const { return (x - center_) / scale_; }

  void values(const Vec2& x, Eigen::Ref<Vector> out) const {
    std::array<double, kMaxDegree + 1> px, py;
    fill_powers(local(x), px, py);
    for (int i = 0; i < size(); ++i) out[i] = px[powers_[i][0]] * py[powers_[i][1]];
  }

  /// Physical-frame gradients, one row per monomial.
  void gradients(const Vec2& x, Eigen::Ref<Eigen::MatrixX2d> out) const {
    std::array<double, kMaxDegree + 1> px, py;
    fill_powers(local(x), px, py);
    for (int i = 0; i < size(); ++i) {
      const int a = powers_[i][0], b = powers_[i][1];
      out(i, 0) = a > 0 ? a * px[a - 1] * py[b] / scale_ : 0.0;
      out(i, 1) = b > 0 ? b * px[a] * py[b - 1] / scale_ : 0.0;
    }
  }

  Vector values(const Vec2& x) const {
    Vector v(size());
    values(x, v);
    return v;
  }

  Eigen::MatrixX2d gradients(const Vec2& x) const {
    Eigen::MatrixX2d g(size(), 2);
    gradients(x, g);
    return g;
  }

 private:
  template <class A>
  void fill_powers(const Vec2& s, A& px, A& py) const {
    px[0] = py[0] = 1.0;
    for (int i = 1; i <= degree_; ++i) {
      px[i] = px[i - 1] * s.x();
      py[i] = py[i - 1] * s.y();
    }
  }

  int degree_ = 0;
  Vec2 center_ = Vec2::Zero();
  double scale_ = 1.0;
  std::vector<std::array<int, 2>> powers_;
};

/// Shifted Legendre polynomial L_k(2t - 1) on [0, 1].
inline double shifted_legendre(int k, double t) {
  const double x = 2.0 * t - 1.0;
  double p0 = 1.0, p1 = x;
  if (k == 0) return p0;
  for (int j = 2; j <= k; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace lsfem
