#pragma once

#include "lsfem/core.hpp"

#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

namespace lsfem {

/// A set of weighted points. Interface rules also carry the unit normal
/// (pointing into the outer subdomain) and the polygon side index per point.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  std::vector<Vec2> normals;
  std::vector<int> sides;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  void append(const QuadratureRule& other) {
    points.insert(points.end(), other.points.begin(), other.points.end());
    weights.insert(weights.end(), other.weights.begin(), other.weights.end());
    normals.insert(normals.end(), other.normals.begin(), other.normals.end());
    sides.insert(sides.end(), other.sides.begin(), other.sides.end());
  }
};

namespace detail {

struct GaussTable {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

inline GaussTable compute_gauss_legendre(int n) {
  GaussTable t;
  t.nodes.resize(n);
  t.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    t.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    t.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return t;
}

}  // namespace detail

/// Gauss-Legendre rule with `n` points on [0, 1]; exact for degree 2n-1.
inline const detail::GaussTable& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, detail::GaussTable> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
  return it->second;
}

inline int gauss_points_for_degree(int degree) { return std::max(1, (degree + 2) / 2); }

/// Gauss rule on the segment [a, b], exact for polynomials of `degree`.
inline QuadratureRule segment_rule(const Vec2& a, const Vec2& b, int degree) {
  const auto& g = gauss_legendre(gauss_points_for_degree(degree));
  const double len = (b - a).norm();
  QuadratureRule q;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    q.points.push_back(a + g.nodes[i] * (b - a));
    q.weights.push_back(g.weights[i] * len);
  }
  return q;
}

/// Collapsed (Duffy) Gauss product rule on triangle (a, b, c). All weights are
/// positive and the rule is exact for total degree `degree`.
inline QuadratureRule triangle_rule(const Vec2& a, const Vec2& b, const Vec2& c, int degree) {
  const auto& gu = gauss_legendre(gauss_points_for_degree(degree + 1));
  const auto& gv = gauss_legendre(gauss_points_for_degree(degree));
  const double area2 = std::abs(cross(b - a, c - a));
  QuadratureRule q;
  q.points.reserve(gu.nodes.size() * gv.nodes.size());
  q.weights.reserve(gu.nodes.size() * gv.nodes.size());
  for (std::size_t i = 0; i < gu.nodes.size(); ++i) {
    const double u = gu.nodes[i];
    for (std::size_t j = 0; j < gv.nodes.size(); ++j) {
      const double xi = u;
      const double eta = (1.0 - u) * gv.nodes[j];
      q.points.push_back(a + xi * (b - a) + eta * (c - a));
      q.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - u) * area2);
    }
  }
  return q;
}

/// Fan triangulation rule on a convex polygon.
inline QuadratureRule convex_polygon_rule(std::span<const Vec2> poly, int degree) {
  QuadratureRule q;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    if (std::abs(triangle_area(poly[0], poly[i], poly[i + 1])) <= 0.0) continue;
    q.append(triangle_rule(poly[0], poly[i], poly[i + 1], degree));
  }
  return q;
}

}  // namespace lsfem
