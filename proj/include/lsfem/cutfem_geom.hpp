#pragma once

#include "lsfem/core.hpp"
#include "lsfem/interface.hpp"
#include "lsfem/mesh.hpp"
#include "lsfem/quadrature.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace lsfem {

struct GeometryOptions {
  int n_sub = 8;              // sub-triangulation level for level-set interfaces
  double sliver_tol = 1e-12;  // relative area below which a side is ignored
  bool strict = true;         // throw on assumption violations; otherwise record them
};

struct AssumptionRecord {
  int assumption;
  int element;
  std::string what;
};

using Polygon = std::vector<Vec2>;

/// One straight piece of Gamma inside an element, with its polygon side index.
struct InterfacePiece {
  Vec2 a, b;
  int side = 0;
};

struct CutElementGeometry {
  std::array<std::vector<Polygon>, 2> cells;  // convex, counterclockwise
  std::array<double, 2> area{0.0, 0.0};
  std::vector<InterfacePiece> pieces;
};

enum class Region : std::uint8_t { interior0 = 0, interior1 = 1, cut = 2 };

struct CutClassification {
  std::vector<Region> region;
  std::vector<int> interior0, interior1, cut;
  std::vector<int> covered0, covered1;
  std::vector<int> anchor0, anchor1;  // per element; -1 unless cut
  std::vector<int> cut_slot;          // per element; index into geometry or -1
  std::vector<CutElementGeometry> geometry;
  std::vector<AssumptionRecord> violations;  // only filled in non-strict mode
  GeometryOptions options;

  const std::vector<int>& interior(int i) const { return i == 0 ? interior0 : interior1; }
  const std::vector<int>& covered(int i) const { return i == 0 ? covered0 : covered1; }
  int anchor(int i, int k) const { return i == 0 ? anchor0[k] : anchor1[k]; }
  bool is_cut(int k) const { return region[k] == Region::cut; }
  bool covers(int i, int k) const {
    return region[k] == Region::cut || static_cast<int>(region[k]) == i;
  }
  const CutElementGeometry& cut_geometry(int k) const {
    if (cut_slot[k] < 0) throw ConfigError("element " + std::to_string(k) + " is not cut");
    return geometry[cut_slot[k]];
  }
};

namespace detail {

inline double polygon_area(const Polygon& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * a;
}

inline Vec2 polygon_centroid(const Polygon& p) {
  Vec2 c = Vec2::Zero();
  double a = 0.0;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    const double t = triangle_area(p[0], p[i], p[i + 1]);
    c += t * (p[0] + p[i] + p[i + 1]) / 3.0;
    a += t;
  }
  if (a <= 0.0) {
    c.setZero();
    for (const auto& v : p) c += v;
    return c / static_cast<double>(p.size());
  }
  return c / a;
}

/// Split a convex polygon by the line {x : nrm.(x - p) = 0}.
inline void split_convex(const Polygon& poly, const Vec2& p, const Vec2& nrm, double eps, Polygon& neg,
                         Polygon& pos) {
  const std::size_t n = poly.size();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = nrm.dot(poly[i] - p);
    if (std::abs(s[i]) < eps) s[i] = 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if (s[i] <= 0.0) neg.push_back(poly[i]);
    if (s[i] >= 0.0) pos.push_back(poly[i]);
    if ((s[i] < 0.0 && s[j] > 0.0) || (s[i] > 0.0 && s[j] < 0.0)) {
      const Vec2 x = poly[i] + s[i] / (s[i] - s[j]) * (poly[j] - poly[i]);
      neg.push_back(x);
      pos.push_back(x);
    }
  }
}

/// Point on [a, b] where phi changes sign; phi(a) <= 0 < phi(b).
inline Vec2 bisect_root(const Interface& iface, Vec2 a, Vec2 b) {
  const double tol = 1e-15 * std::max(1.0, a.norm());
  for (int it = 0; it < 200 && (b - a).norm() > tol; ++it) {
    const Vec2 m = 0.5 * (a + b);
    if (iface.value(m) <= 0.0) {
      a = m;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Split a sub-triangle by the zero level set of phi.
inline void split_levelset_triangle(const Interface& iface, const std::array<Vec2, 3>& tri,
                                    const std::array<double, 3>& phi, CutElementGeometry& g) {
  const bool n0 = phi[0] <= 0.0, n1 = phi[1] <= 0.0, n2 = phi[2] <= 0.0;
  if (n0 && n1 && n2) {
    g.cells[0].push_back({tri[0], tri[1], tri[2]});
    return;
  }
  if (!n0 && !n1 && !n2) {
    g.cells[1].push_back({tri[0], tri[1], tri[2]});
    return;
  }
  Polygon neg, pos;
  std::vector<Vec2> roots;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const bool ni = phi[i] <= 0.0, nj = phi[j] <= 0.0;
    if (ni) {
      neg.push_back(tri[i]);
    } else {
      pos.push_back(tri[i]);
    }
    if (ni != nj) {
      const Vec2 x = ni ? bisect_root(iface, tri[i], tri[j]) : bisect_root(iface, tri[j], tri[i]);
      neg.push_back(x);
      pos.push_back(x);
      roots.push_back(x);
    }
  }
  if (neg.size() >= 3 && polygon_area(neg) > 0.0) g.cells[0].push_back(std::move(neg));
  if (pos.size() >= 3 && polygon_area(pos) > 0.0) g.cells[1].push_back(std::move(pos));
  if (roots.size() == 2 && (roots[1] - roots[0]).norm() > 0.0) {
    g.pieces.push_back({roots[0], roots[1], 0});
  }
}

inline CutElementGeometry levelset_element_geometry(const Mesh& mesh, const Interface& iface, int k,
                                                    int n, const std::vector<double>& lattice) {
  const auto p = mesh.element_points(k);
  auto node = [&](int i, int j) { return p[0] + (double(i) / n) * (p[1] - p[0]) + (double(j) / n) * (p[2] - p[0]); };
  auto idx = [n](int i, int j) { return j * (n + 1) - j * (j - 1) / 2 + i; };
  CutElementGeometry g;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i + j < n; ++i) {
      split_levelset_triangle(iface, {node(i, j), node(i + 1, j), node(i, j + 1)},
                              {lattice[idx(i, j)], lattice[idx(i + 1, j)], lattice[idx(i, j + 1)]}, g);
      if (i + j + 2 <= n) {
        split_levelset_triangle(
            iface, {node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)},
            {lattice[idx(i + 1, j)], lattice[idx(i + 1, j + 1)], lattice[idx(i, j + 1)]}, g);
      }
    }
  }
  for (int s = 0; s < 2; ++s) {
    for (const auto& c : g.cells[s]) g.area[s] += polygon_area(c);
  }
  return g;
}

/// Clip segment s to the closed triangle; returns false if the overlap has no length.
inline bool clip_segment_to_triangle(const Segment& s, const std::array<Vec2, 3>& tri, double eps, Vec2& a,
                                     Vec2& b) {
  double t0 = 0.0, t1 = 1.0;
  const Vec2 d = s.b - s.a;
  for (int i = 0; i < 3; ++i) {
    const Vec2& u = tri[i];
    const Vec2& v = tri[(i + 1) % 3];
    const Vec2 e = v - u;
    const double len = e.norm();
    const double f0 = cross(e, s.a - u) / len;
    const double fd = cross(e, d) / len;
    if (std::abs(fd) <= 1e-12 * d.norm()) {
      // parallel to this edge: inside iff on the inner side up to eps
      if (f0 < -eps) return false;
      continue;
    }
    const double t = -f0 / fd;
    if (fd > 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 >= t1) return false;
  }
  a = s.point(t0);
  b = s.point(t1);
  return (b - a).norm() > 1e3 * eps;
}

inline CutElementGeometry polygon_element_geometry(const Mesh& mesh, const Interface& iface, int k) {
  const auto p = mesh.element_points(k);
  const double hk = mesh.element_diameter(k);
  const double eps = 1e-12 * hk;
  CutElementGeometry g;
  std::vector<Polygon> cells{{p[0], p[1], p[2]}};
  const auto& sides = iface.polygon_sides();
  for (std::size_t j = 0; j < sides.size(); ++j) {
    Vec2 a, b;
    if (!clip_segment_to_triangle(sides[j], p, eps, a, b)) continue;
    const Vec2 nrm = sides[j].outward_normal();
    std::vector<Polygon> next;
    for (const auto& c : cells) {
      Polygon neg, pos;
      split_convex(c, sides[j].a, nrm, eps, neg, pos);
      if (neg.size() >= 3 && polygon_area(neg) > eps * eps) next.push_back(std::move(neg));
      if (pos.size() >= 3 && polygon_area(pos) > eps * eps) next.push_back(std::move(pos));
    }
    cells = std::move(next);

    // A piece lying on a mesh edge belongs to the incident element with the smallest id.
    bool keep = true;
    for (int i = 0; i < 3; ++i) {
      const Vec2& u = p[(i + 1) % 3];
      const Vec2& v = p[(i + 2) % 3];
      const Vec2 e = (v - u).normalized();
      if (std::abs(cross(e, a - u)) <= eps && std::abs(cross(e, b - u)) <= eps) {
        const auto& edge = mesh.edge(mesh.element_edges(k)[i]);
        const int owner = *std::min_element(edge.elements.begin(), edge.elements.end());
        keep = owner == k;
        break;
      }
    }
    if (keep) g.pieces.push_back({a, b, static_cast<int>(j)});
  }
  for (auto& c : cells) {
    const int s = iface.in_omega0(polygon_centroid(c)) ? 0 : 1;
    g.area[s] += polygon_area(c);
    g.cells[s].push_back(std::move(c));
  }
  return g;
}

/// Number of transversal crossings of Gamma along the segment [a, b].
inline int count_edge_crossings(const Interface& iface, const Vec2& a, const Vec2& b, int samples) {
  std::vector<double> ts{0.0, 1.0};
  if (iface.kind() == InterfaceKind::polygon) {
    const Vec2 d = b - a;
    for (const auto& s : iface.polygon_sides()) {
      const Vec2 e = s.b - s.a;
      const double den = cross(d, e);
      if (std::abs(den) <= 1e-14 * d.norm() * e.norm()) continue;
      const double t = cross(s.a - a, e) / den;
      const double u = cross(s.a - a, d) / den;
      if (t >= -1e-12 && t <= 1.0 + 1e-12 && u >= -1e-12 && u <= 1.0 + 1e-12) {
        ts.push_back(std::clamp(t, 0.0, 1.0));
      }
    }
    std::sort(ts.begin(), ts.end());
    std::vector<double> u{ts[0]};
    for (double t : ts) {
      if (t - u.back() > 1e-12) u.push_back(t);
    }
    ts = std::move(u);
    int changes = 0;
    for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
      const bool m0 = iface.in_omega0(a + 0.5 * (ts[i - 1] + ts[i]) * d);
      const bool m1 = iface.in_omega0(a + 0.5 * (ts[i] + ts[i + 1]) * d);
      if (m0 != m1) ++changes;
    }
    return changes;
  }
  int changes = 0;
  bool prev = iface.in_omega0(a);
  for (int i = 1; i <= samples; ++i) {
    const bool cur = iface.in_omega0(a + (double(i) / samples) * (b - a));
    if (cur != prev) ++changes;
    prev = cur;
  }
  return changes;
}

/// Closest element of region `want` among the elements touching Delta(K).
inline int nearest_in_second_ring(const Mesh& mesh, const std::vector<Region>& region, int k, Region want) {
  int best = -1;
  double bd = 0.0;
  const Vec2 xk = mesh.barycenter(k);
  for (int j : mesh.delta_neighborhood(k).members) {
    for (int l : mesh.delta_neighborhood(j).members) {
      if (region[l] != want) continue;
      const double d = (mesh.barycenter(l) - xk).norm();
      if (best < 0 || d < bd - 1e-14 || (std::abs(d - bd) <= 1e-14 && l < best)) {
        best = l;
        bd = d;
      }
    }
  }
  return best;
}

}  // namespace detail

/// Sorts the elements into interior0, interior1 and cut, computes the cut-cell
/// geometry, picks anchors and checks the two resolution assumptions.
inline CutClassification classify(const Mesh& mesh, const Interface& iface, const GeometryOptions& opts = {}) {
  if (opts.n_sub < 1) throw ConfigError("n_sub must be at least 1");
  const int ne = mesh.num_elements();
  CutClassification c;
  c.options = opts;
  c.region.assign(ne, Region::interior0);
  c.cut_slot.assign(ne, -1);
  c.anchor0.assign(ne, -1);
  c.anchor1.assign(ne, -1);

  const int n = opts.n_sub;
  std::vector<double> lattice;
  for (int k = 0; k < ne; ++k) {
    const double area = mesh.element_area(k);
    CutElementGeometry g;
    if (iface.kind() == InterfaceKind::levelset) {
      const auto p = mesh.element_points(k);
      lattice.clear();
      bool any_neg = false, any_pos = false;
      for (int j = 0; j <= n; ++j) {
        for (int i = 0; i + j <= n; ++i) {
          const double v = iface.value(p[0] + (double(i) / n) * (p[1] - p[0]) + (double(j) / n) * (p[2] - p[0]));
          lattice.push_back(v);
          (v <= 0.0 ? any_neg : any_pos) = true;
        }
      }
      if (!any_pos || !any_neg) {
        c.region[k] = any_pos ? Region::interior1 : Region::interior0;
        continue;
      }
      g = detail::levelset_element_geometry(mesh, iface, k, n, lattice);
      if (g.area[0] < opts.sliver_tol * area || g.area[1] < opts.sliver_tol * area) {
        c.region[k] = g.area[0] >= g.area[1] ? Region::interior0 : Region::interior1;
        continue;
      }
    } else {
      g = detail::polygon_element_geometry(mesh, iface, k);
      const bool both = g.area[0] >= opts.sliver_tol * area && g.area[1] >= opts.sliver_tol * area;
      if (!both && g.pieces.empty()) {
        c.region[k] = g.area[0] >= g.area[1] ? Region::interior0 : Region::interior1;
        continue;
      }
      if (!both) {
        // Gamma runs along an edge of K: keep only the nonempty side.
        const int s = g.area[0] >= g.area[1] ? 0 : 1;
        g.cells[1 - s].clear();
        g.area[1 - s] = 0.0;
      }
    }
    c.region[k] = Region::cut;
    c.cut_slot[k] = static_cast<int>(c.geometry.size());
    c.geometry.push_back(std::move(g));
  }

  for (int k = 0; k < ne; ++k) {
    switch (c.region[k]) {
      case Region::interior0: c.interior0.push_back(k); c.covered0.push_back(k); break;
      case Region::interior1: c.interior1.push_back(k); c.covered1.push_back(k); break;
      case Region::cut:
        c.cut.push_back(k);
        c.covered0.push_back(k);
        c.covered1.push_back(k);
        break;
    }
  }

  for (int k : c.cut) {
    for (int e : mesh.element_edges(k)) {
      const auto& ed = mesh.edge(e);
      const int crossings =
          detail::count_edge_crossings(iface, mesh.vertex(ed.vertices[0]), mesh.vertex(ed.vertices[1]), 4 * n);
      if (crossings >= 2) {
        const std::string what =
            "the interface crosses edge " + std::to_string(e) + " " + std::to_string(crossings) + " times";
        if (opts.strict) throw AssumptionViolation(1, k, what);
        c.violations.push_back({1, k, what});
      }
    }
    for (int i = 0; i < 2; ++i) {
      const Region want = i == 0 ? Region::interior0 : Region::interior1;
      int best = -1;
      for (int j : mesh.face_neighbors(k)) {
        if (c.region[j] == want) {
          best = j;
          break;
        }
      }
      if (best < 0) {
        for (int j : mesh.delta_neighborhood(k).members) {
          if (c.region[j] == want) {
            best = j;
            break;
          }
        }
      }
      if (best < 0) {
        const std::string what =
            "no interior element of subdomain " + std::to_string(i) + " touches this cut element";
        if (opts.strict) throw AssumptionViolation(2, k, what);
        c.violations.push_back({2, k, what});
        best = detail::nearest_in_second_ring(mesh, c.region, k, want);
        if (best < 0) throw AssumptionViolation(2, k, what + ", not even within two layers");
      }
      (i == 0 ? c.anchor0 : c.anchor1)[k] = best;
    }
  }
  return c;
}

/// Quadrature on K intersected with the polygonal approximation of Omega_side.
inline QuadratureRule bulk_cut_quadrature(const Mesh& mesh, const CutClassification& c, int k, int side,
                                          int degree) {
  if (degree < 1) throw ConfigError("bulk quadrature degree must be at least 1");
  if (c.region[k] == Region::cut) {
    QuadratureRule q;
    for (const auto& cell : c.cut_geometry(k).cells[side]) q.append(convex_polygon_rule(cell, degree));
    return q;
  }
  if (static_cast<int>(c.region[k]) != side) return {};
  const auto p = mesh.element_points(k);
  return triangle_rule(p[0], p[1], p[2], degree);
}

/// Quadrature on Gamma inside a cut element, with normals and side indices.
inline QuadratureRule interface_quadrature(const Interface& iface, const CutClassification& c, int k,
                                           int degree) {
  QuadratureRule q;
  if (!c.is_cut(k)) return q;
  for (const auto& piece : c.cut_geometry(k).pieces) {
    QuadratureRule s = segment_rule(piece.a, piece.b, degree);
    for (const auto& x : s.points) {
      if (iface.kind() == InterfaceKind::polygon) {
        s.normals.push_back(iface.polygon_sides()[piece.side].outward_normal());
      } else {
        s.normals.push_back(iface.normal(x));
      }
      s.sides.push_back(piece.side);
    }
    q.append(s);
  }
  return q;
}

}  // namespace lsfem
