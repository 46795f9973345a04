#pragma once

#include "lsfem/core.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <vector>

namespace lsfem {

struct Rectangle {
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;

  double area() const { return (x1 - x0) * (y1 - y0); }
};

struct Edge {
  std::array<int, 2> vertices;  // vertices[0] < vertices[1]; this is the global orientation
  std::vector<int> elements;    // 1 (boundary) or 2 (interior) incident elements

  bool on_boundary() const { return elements.size() == 1; }
};

struct ElementNeighborhood {
  int element = -1;
  std::vector<int> members;  // sorted, contains `element`

  bool contains(int k) const { return std::binary_search(members.begin(), members.end(), k); }
};

/// Conforming triangulation of a rectangle. Immutable after construction.
class Mesh {
 public:
  Mesh(Rectangle domain, std::vector<Vec2> vertices, std::vector<std::array<int, 3>> elements)
      : domain_(domain), vertices_(std::move(vertices)), elements_(std::move(elements)) {
    build_topology();
  }

  const Rectangle& domain() const { return domain_; }
  double h() const { return h_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& element(int k) const { return elements_[k]; }
  const Edge& edge(int e) const { return edges_[e]; }

  /// Global edge ids of element k; local edge i is opposite local vertex i,
  /// i.e. it joins local vertices (i+1)%3 and (i+2)%3.
  const std::array<int, 3>& element_edges(int k) const { return element_edges_[k]; }

  std::array<Vec2, 3> element_points(int k) const {
    const auto& t = elements_[k];
    return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
  }

  double element_area(int k) const {
    const auto p = element_points(k);
    return triangle_area(p[0], p[1], p[2]);
  }

  double element_diameter(int k) const {
    const auto p = element_points(k);
    return std::max({(p[1] - p[0]).norm(), (p[2] - p[1]).norm(), (p[0] - p[2]).norm()});
  }

  Vec2 barycenter(int k) const {
    const auto p = element_points(k);
    return (p[0] + p[1] + p[2]) / 3.0;
  }

  bool vertex_on_boundary(int v) const { return vertex_on_boundary_[v]; }

  /// Elements sharing at least one vertex with k (k included), sorted.
  ElementNeighborhood delta_neighborhood(int k) const {
    if (k < 0 || k >= num_elements()) {
      throw ConfigError("delta_neighborhood: invalid element id " + std::to_string(k));
    }
    ElementNeighborhood nb;
    nb.element = k;
    for (int v : elements_[k]) {
      for (int e : vertex_elements_[v]) nb.members.push_back(e);
    }
    std::sort(nb.members.begin(), nb.members.end());
    nb.members.erase(std::unique(nb.members.begin(), nb.members.end()), nb.members.end());
    return nb;
  }

  /// Elements sharing an edge with k (k excluded).
  std::vector<int> face_neighbors(int k) const {
    std::vector<int> out;
    for (int e : element_edges_[k]) {
      for (int j : edges_[e].elements) {
        if (j != k) out.push_back(j);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Barycentric coordinates of x with respect to element k.
  std::array<double, 3> barycentric(int k, const Vec2& x) const {
    const auto p = element_points(k);
    const double a = triangle_area(p[0], p[1], p[2]);
    return {triangle_area(x, p[1], p[2]) / a, triangle_area(p[0], x, p[2]) / a,
            triangle_area(p[0], p[1], x) / a};
  }

 private:
  void build_topology() {
    std::map<std::pair<int, int>, int> edge_ids;
    element_edges_.resize(elements_.size());
    vertex_elements_.assign(vertices_.size(), {});
    h_ = 0.0;
    for (int k = 0; k < num_elements(); ++k) {
      const auto& t = elements_[k];
      if (element_area(k) <= 0.0) {
        throw ConfigError("mesh element " + std::to_string(k) + " is not counterclockwise");
      }
      h_ = std::max(h_, element_diameter(k));
      for (int i = 0; i < 3; ++i) {
        vertex_elements_[t[i]].push_back(k);
        int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
        if (a > b) std::swap(a, b);
        auto [it, inserted] = edge_ids.try_emplace({a, b}, num_edges());
        if (inserted) edges_.push_back(Edge{{a, b}, {}});
        edges_[it->second].elements.push_back(k);
        element_edges_[k][i] = it->second;
      }
    }
    vertex_on_boundary_.assign(vertices_.size(), false);
    for (const auto& e : edges_) {
      if (e.elements.size() > 2) throw ConfigError("non-manifold edge in mesh");
      if (e.on_boundary()) {
        vertex_on_boundary_[e.vertices[0]] = true;
        vertex_on_boundary_[e.vertices[1]] = true;
      }
    }
  }

  Rectangle domain_;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> element_edges_;
  std::vector<std::vector<int>> vertex_elements_;
  std::vector<bool> vertex_on_boundary_;
  double h_ = 0.0;
};

/// n x n squares, each split along its lower-left to upper-right diagonal.
inline Mesh build_uniform(const Rectangle& domain, int n) {
  if (n < 2) throw ConfigError("build_uniform: need at least 2 cells per side, got " + std::to_string(n));
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0)) throw ConfigError("build_uniform: empty domain");
  std::vector<Vec2> verts;
  verts.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double x = (i == n) ? domain.x1 : domain.x0 + (domain.x1 - domain.x0) * i / n;
      const double y = (j == n) ? domain.y1 : domain.y0 + (domain.y1 - domain.y0) * j / n;
      verts.emplace_back(x, y);
    }
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 3>> elems;
  elems.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      elems.push_back({v00, v10, v11});
      elems.push_back({v00, v11, v01});
    }
  }
  return Mesh(domain, std::move(verts), std::move(elems));
}

}  // namespace lsfem
