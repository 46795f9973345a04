#pragma once

#include "lsfem/core.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace lsfem {

enum class InterfaceKind { levelset, polygon };

struct Segment {
  Vec2 a, b;

  double length() const { return (b - a).norm(); }
  Vec2 tangent() const { return (b - a) / length(); }
  /// Right-hand normal; for a counterclockwise chain this points outward.
  Vec2 outward_normal() const {
    const Vec2 t = tangent();
    return {t.y(), -t.x()};
  }
  Vec2 point(double t) const { return a + t * (b - a); }
};

struct LevelsetValue {
  double value;
  bool in_omega0;
};

inline double point_segment_distance(const Vec2& x, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (x - s.a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (x - s.point(t)).norm();
}

/// Winding number of a closed chain around x (x must not lie on the chain).
inline int winding_number(const std::vector<Vec2>& chain, const Vec2& x) {
  int wn = 0;
  const std::size_t n = chain.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = chain[i];
    const Vec2& b = chain[(i + 1) % n];
    const double side = cross(b - a, x - a);
    if (a.y() <= x.y()) {
      if (b.y() > x.y() && side > 0.0) ++wn;
    } else {
      if (b.y() <= x.y() && side < 0.0) --wn;
    }
  }
  return wn;
}

/// The material interface. Omega_0 is {phi <= 0}, the normal points into Omega_1.
class Interface {
 public:
  using ScalarFn = std::function<double(const Vec2&)>;
  using GradFn = std::function<Vec2(const Vec2&)>;

  static Interface levelset(std::string name, ScalarFn phi, GradFn grad) {
    Interface g;
    g.kind_ = InterfaceKind::levelset;
    g.name_ = std::move(name);
    g.phi_ = std::move(phi);
    g.grad_ = std::move(grad);
    return g;
  }

  static Interface circle(const Vec2& center, double radius) {
    if (!(radius > 0.0)) throw ConfigError("circle radius must be positive");
    return levelset(
        "circle", [center, radius](const Vec2& x) { return (x - center).norm() - radius; },
        [center](const Vec2& x) -> Vec2 {
          const Vec2 d = x - center;
          const double r = d.norm();
          if (r == 0.0) return Vec2::Zero();
          return d / r;
        });
  }

  /// r(theta) = 1/2 + sin(5 theta)/7 around `center`.
  static Interface star5(const Vec2& center = Vec2::Zero()) {
    return levelset(
        "star5",
        [center](const Vec2& x) {
          const Vec2 d = x - center;
          return d.norm() - (0.5 + std::sin(5.0 * std::atan2(d.y(), d.x())) / 7.0);
        },
        [center](const Vec2& x) -> Vec2 {
          const Vec2 d = x - center;
          const double r2 = d.squaredNorm();
          if (r2 == 0.0) return Vec2::Zero();
          const double r = std::sqrt(r2);
          const double dR = 5.0 * std::cos(5.0 * std::atan2(d.y(), d.x())) / 7.0;
          return d / r - dR * Vec2(-d.y(), d.x()) / r2;
        });
  }

  /// Closed simple polygon; vertices must be counterclockwise.
  static Interface polygon(std::vector<Vec2> vertices, std::string name = "polygon") {
    if (vertices.size() < 3) throw ConfigError("polygon needs at least 3 vertices");
    double area2 = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      area2 += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
    }
    if (!(area2 > 0.0)) throw ConfigError("polygon chain must be counterclockwise");
    Interface g;
    g.kind_ = InterfaceKind::polygon;
    g.name_ = std::move(name);
    g.vertices_ = std::move(vertices);
    for (std::size_t i = 0; i < g.vertices_.size(); ++i) {
      g.segments_.push_back({g.vertices_[i], g.vertices_[(i + 1) % g.vertices_.size()]});
    }
    return g;
  }

  /// L-shaped chain with the reentrant corner at the origin, opening towards -x.
  static Interface lshape() {
    return polygon({{0.0, 0.0},
                    {-0.35, -0.35},
                    {0.0, -0.7},
                    {0.7, 0.0},
                    {0.0, 0.7},
                    {-0.35, 0.35}},
                   "lshape");
  }

  static Interface by_name(const std::string& name, const Vec2& shift = Vec2::Zero(),
                           double radius = 0.7) {
    if (name == "circle") return circle(shift, radius);
    if (name == "star5") return star5(shift);
    if (name == "lshape") return lshape().shifted(shift);
    throw ConfigError("unknown interface '" + name + "'");
  }

  Interface shifted(const Vec2& d) const {
    if (d.isZero(0.0)) return *this;
    if (kind_ == InterfaceKind::polygon) {
      auto v = vertices_;
      for (auto& p : v) p += d;
      return polygon(std::move(v), name_);
    }
    auto phi = phi_;
    auto grad = grad_;
    return levelset(
        name_, [phi, d](const Vec2& x) { return phi(x - d); },
        [grad, d](const Vec2& x) { return grad(x - d); });
  }

  InterfaceKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  /// phi for level sets, signed distance for polygons.
  double value(const Vec2& x) const {
    if (kind_ == InterfaceKind::levelset) return phi_(x);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : segments_) d = std::min(d, point_segment_distance(x, s));
    if (d == 0.0) return 0.0;
    return winding_number(vertices_, x) != 0 ? -d : d;
  }

  LevelsetValue eval(const Vec2& x) const {
    const double v = value(x);
    return {v, v <= 0.0};
  }

  bool in_omega0(const Vec2& x) const { return value(x) <= 0.0; }

  Vec2 gradient(const Vec2& x) const {
    if (kind_ != InterfaceKind::levelset) throw ConfigError("gradient is defined for level sets only");
    return grad_(x);
  }

  /// Unit normal pointing into Omega_1.
  Vec2 normal(const Vec2& x) const {
    if (kind_ == InterfaceKind::levelset) {
      const Vec2 g = grad_(x);
      const double n = g.norm();
      if (!(n > 0.0)) throw ConfigError("interface normal: vanishing gradient");
      return g / n;
    }
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      if ((x - vertices_[i]).norm() <= 1e-12) {
        std::ostringstream os;
        os << "interface normal: point is at polygon corner " << i << " (" << vertices_[i].x() << ", "
           << vertices_[i].y() << ")";
        throw ConfigError(os.str());
      }
    }
    return segments_[nearest_side(x)].outward_normal();
  }

  int nearest_side(const Vec2& x) const {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < segments_.size(); ++j) {
      const double d = point_segment_distance(x, segments_[j]);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(j);
      }
    }
    return best;
  }

  /// Number of smooth sides; a level set counts as one.
  int num_sides() const {
    return kind_ == InterfaceKind::polygon ? static_cast<int>(segments_.size()) : 1;
  }

  /// Polygon sides in chain order (empty for level sets).
  const std::vector<Segment>& polygon_sides() const { return segments_; }
  const std::vector<Vec2>& polygon_vertices() const { return vertices_; }

 private:
  InterfaceKind kind_ = InterfaceKind::levelset;
  std::string name_;
  ScalarFn phi_;
  GradFn grad_;
  std::vector<Vec2> vertices_;
  std::vector<Segment> segments_;
};

}  // namespace lsfem
