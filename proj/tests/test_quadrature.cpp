#include "lsfem/quadrature.hpp"

#include <gtest/gtest.h>

using namespace lsfem;

namespace {

// Integral of x^p y^q over the triangle (0,0), (1,0), (0,1).
double monomial_integral(int p, int q) {
  double f = 1.0;
  for (int i = 1; i <= p; ++i) f *= i;
  for (int i = 1; i <= q; ++i) f *= i;
  double d = 1.0;
  for (int i = 1; i <= p + q + 2; ++i) d *= i;
  return f / d;
}

}  // namespace

TEST(Quadrature, GaussLegendreWeights) {
  for (int n = 1; n <= 12; ++n) {
    const auto& g = gauss_legendre(n);
    double s = 0.0;
    for (double w : g.weights) {
      EXPECT_GT(w, 0.0);
      s += w;
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double q = 0.0;
      for (int i = 0; i < n; ++i) q += g.weights[i] * std::pow(g.nodes[i], p);
      EXPECT_NEAR(q, 1.0 / (p + 1), 1e-14) << n << " " << p;
    }
  }
}

TEST(Quadrature, TriangleExactness) {
  for (int deg = 1; deg <= 10; ++deg) {
    const auto q = triangle_rule({0, 0}, {1, 0}, {0, 1}, deg);
    for (double w : q.weights) EXPECT_GT(w, 0.0);
    for (int p = 0; p <= deg; ++p) {
      for (int r = 0; p + r <= deg; ++r) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
          s += q.weights[i] * std::pow(q.points[i].x(), p) * std::pow(q.points[i].y(), r);
        }
        EXPECT_NEAR(s, monomial_integral(p, r), 1e-14);
      }
    }
  }
}

TEST(Quadrature, PolygonAndSegment) {
  const std::vector<Vec2> square{{0, 0}, {2, 0}, {2, 1}, {0, 1}};
  const auto q = convex_polygon_rule(square, 4);
  EXPECT_NEAR(q.total_weight(), 2.0, 1e-14);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * q.points[i].x() * q.points[i].x();
  EXPECT_NEAR(s, 8.0 / 3.0, 1e-13);
  const auto seg = segment_rule({0, 0}, {3, 4}, 5);
  EXPECT_NEAR(seg.total_weight(), 5.0, 1e-14);
}
