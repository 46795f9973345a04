#pragma once

#include "lsfem/core.hpp"
#include "lsfem/mesh.hpp"
#include "lsfem/polynomial.hpp"
#include "lsfem/quadrature.hpp"

#include <Eigen/LU>

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <tuple>
#include <vector>

namespace lsfem {

enum class Family { bdm, lagrange };

/// Local basis on one element: basis function j is sum_l coeffs(l, j) phi_l,
/// where phi_l are scaled monomials (bdm: x-component block, then y-component block).
struct ElementBasis {
  Family family = Family::lagrange;
  int ndof = 0;
  MonomialBasis mono;
  const DenseMatrix* coeffs = nullptr;

  /// bdm: vector values (ndof x 2) and divergences.
  void eval_bdm(const Vec2& x, Eigen::MatrixX2d& value, Vector& div) const {
    const int p = mono.size();
    const Vector m = mono.values(x);
    const Eigen::MatrixX2d g = mono.gradients(x);
    const auto top = coeffs->topRows(p);
    const auto bot = coeffs->bottomRows(p);
    value.resize(ndof, 2);
    value.col(0).noalias() = top.transpose() * m;
    value.col(1).noalias() = bot.transpose() * m;
    div.noalias() = top.transpose() * g.col(0);
    div.noalias() += bot.transpose() * g.col(1);
  }

  /// lagrange: scalar values and gradients (ndof x 2).
  void eval_lagrange(const Vec2& x, Vector& value, Eigen::MatrixX2d& grad) const {
    const Vector m = mono.values(x);
    const Eigen::MatrixX2d g = mono.gradients(x);
    value.noalias() = coeffs->transpose() * m;
    grad.noalias() = coeffs->transpose() * g;
  }
};

/// Basis values of one element at a set of points.
struct BasisValues {
  std::vector<Eigen::MatrixX2d> value;  // bdm: ndof x 2; lagrange: ndof x 1 stored in column 0
  std::vector<Vector> div;              // bdm only
  std::vector<Eigen::MatrixX2d> grad;   // lagrange only
};

namespace detail {

/// Interior test functions of BDM_m: P_{m-2}^2 plus (-eta, xi) times homogeneous P_{m-2}.
inline int bdm_interior_count(int m) { return m >= 2 ? (m - 1) * (m + 1) : 0; }

inline Eigen::MatrixX2d bdm_interior_tests(int m, const MonomialBasis& frame, const Vec2& x) {
  const int ni = bdm_interior_count(m);
  Eigen::MatrixX2d q = Eigen::MatrixX2d::Zero(ni, 2);
  if (ni == 0) return q;
  const MonomialBasis low(m - 2, frame.center(), frame.scale());
  const Vector v = low.values(x);
  const int p = low.size();
  for (int i = 0; i < p; ++i) {
    q(i, 0) = v[i];
    q(p + i, 1) = v[i];
  }
  const Vec2 s = frame.local(x);
  const int hom0 = MonomialBasis::dimension(m - 3);
  for (int i = hom0; i < p; ++i) {
    const int r = 2 * p + (i - hom0);
    q(r, 0) = -s.y() * v[i];
    q(r, 1) = s.x() * v[i];
  }
  return q;
}

inline int lagrange_count(int m) { return (m + 1) * (m + 2) / 2; }

}  // namespace detail

/// Finite element space on a set of active elements: one BDM_m vector field
/// (a stress column) or one scalar P_m Lagrange field (a displacement component).
class FESpace {
 public:
  FESpace(const Mesh& mesh, std::vector<int> active, Family family, int m, bool dirichlet = false)
      : mesh_(&mesh), family_(family), m_(m), dirichlet_(dirichlet), active_(std::move(active)) {
    if (m < 1 || m > 3) throw ConfigError("unsupported polynomial degree " + std::to_string(m));
    if (active_.empty()) throw ConfigError("finite element space on an empty element set");
    if (dirichlet && family == Family::bdm) throw ConfigError("Dirichlet masks apply to Lagrange spaces only");
    std::sort(active_.begin(), active_.end());
    build_numbering();
    build_local_bases();
  }

  const Mesh& mesh() const { return *mesh_; }
  Family family() const { return family_; }
  int degree() const { return m_; }
  int num_dofs() const { return ndofs_; }
  int dofs_per_element() const { return nloc_; }
  const std::vector<int>& active_elements() const { return active_; }
  bool is_active(int k) const { return slot_[k] >= 0; }
  int slot(int k) const { return slot_[k]; }

  std::span<const int> element_dofs(int k) const {
    check_active(k);
    return {dofs_.data() + static_cast<std::size_t>(slot_[k]) * nloc_, static_cast<std::size_t>(nloc_)};
  }

  ElementBasis basis(int k) const {
    check_active(k);
    ElementBasis b;
    b.family = family_;
    b.ndof = nloc_;
    b.mono = MonomialBasis(m_, mesh_->barycenter(k), mesh_->element_diameter(k));
    b.coeffs = &shapes_[shape_of_[slot_[k]]];
    return b;
  }

  bool has_dirichlet() const { return dirichlet_; }
  bool is_dirichlet(int dof) const { return !dirichlet_mask_.empty() && dirichlet_mask_[dof]; }
  int num_dirichlet() const { return static_cast<int>(std::count(dirichlet_mask_.begin(), dirichlet_mask_.end(), 1)); }

  /// Lagrange node position of a global DOF.
  const Vec2& node(int dof) const { return nodes_.at(dof); }

  /// Active mesh edges in compact order (BDM edge DOFs are grouped by these).
  const std::vector<int>& edges() const { return edges_; }
  int edge_offset() const { return 0; }
  int interior_offset() const { return interior_offset_; }

 private:
  void check_active(int k) const {
    if (k < 0 || k >= mesh_->num_elements() || slot_[k] < 0) {
      throw ConfigError("element " + std::to_string(k) + " is not active in this space");
    }
  }

  // Local edge i of element k in global orientation.
  std::pair<Vec2, Vec2> oriented_edge(int k, int i) const {
    const auto& t = mesh_->element(k);
    int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
    if (a > b) std::swap(a, b);
    return {mesh_->vertex(a), mesh_->vertex(b)};
  }

  void build_numbering() {
    const Mesh& mesh = *mesh_;
    slot_.assign(mesh.num_elements(), -1);
    for (std::size_t s = 0; s < active_.size(); ++s) slot_[active_[s]] = static_cast<int>(s);
    std::vector<int> edge_id(mesh.num_edges(), -1);
    for (int k : active_) {
      for (int e : mesh.element_edges(k)) {
        if (edge_id[e] < 0) {
          edge_id[e] = static_cast<int>(edges_.size());
          edges_.push_back(e);
        }
      }
    }
    const int ne = static_cast<int>(edges_.size());
    const int nact = static_cast<int>(active_.size());
    if (family_ == Family::bdm) {
      const int per_edge = m_ + 1;
      const int nint = detail::bdm_interior_count(m_);
      nloc_ = 3 * per_edge + nint;
      interior_offset_ = ne * per_edge;
      ndofs_ = interior_offset_ + nact * nint;
      dofs_.resize(static_cast<std::size_t>(nact) * nloc_);
      for (int s = 0; s < nact; ++s) {
        const int k = active_[s];
        int* d = dofs_.data() + static_cast<std::size_t>(s) * nloc_;
        for (int i = 0; i < 3; ++i) {
          const int ce = edge_id[mesh.element_edges(k)[i]];
          for (int j = 0; j < per_edge; ++j) d[i * per_edge + j] = ce * per_edge + j;
        }
        for (int q = 0; q < nint; ++q) d[3 * per_edge + q] = interior_offset_ + s * nint + q;
      }
      return;
    }

    std::vector<int> vert_id(mesh.num_vertices(), -1);
    std::vector<int> verts;
    for (int k : active_) {
      for (int v : mesh.element(k)) {
        if (vert_id[v] < 0) {
          vert_id[v] = static_cast<int>(verts.size());
          verts.push_back(v);
        }
      }
    }
    const int nv = static_cast<int>(verts.size());
    const int per_edge = m_ - 1;
    const int nint = detail::lagrange_count(m_) - 3 - 3 * per_edge;
    nloc_ = detail::lagrange_count(m_);
    interior_offset_ = nv + ne * per_edge;
    ndofs_ = interior_offset_ + nact * nint;
    nodes_.resize(ndofs_);
    dirichlet_mask_.assign(dirichlet_ ? ndofs_ : 0, 0);
    for (int i = 0; i < nv; ++i) {
      nodes_[i] = mesh.vertex(verts[i]);
      if (dirichlet_ && mesh.vertex_on_boundary(verts[i])) dirichlet_mask_[i] = 1;
    }
    for (int c = 0; c < ne; ++c) {
      const auto& ed = mesh.edge(edges_[c]);
      const Vec2& a = mesh.vertex(ed.vertices[0]);
      const Vec2& b = mesh.vertex(ed.vertices[1]);
      for (int j = 0; j < per_edge; ++j) {
        const int dof = nv + c * per_edge + j;
        nodes_[dof] = a + (double(j + 1) / m_) * (b - a);
        if (dirichlet_ && ed.on_boundary()) dirichlet_mask_[dof] = 1;
      }
    }
    dofs_.resize(static_cast<std::size_t>(nact) * nloc_);
    for (int s = 0; s < nact; ++s) {
      const int k = active_[s];
      int* d = dofs_.data() + static_cast<std::size_t>(s) * nloc_;
      for (int i = 0; i < 3; ++i) d[i] = vert_id[mesh.element(k)[i]];
      for (int i = 0; i < 3; ++i) {
        const int ce = edge_id[mesh.element_edges(k)[i]];
        for (int j = 0; j < per_edge; ++j) d[3 + i * per_edge + j] = nv + ce * per_edge + j;
      }
      const auto p = mesh.element_points(k);
      int q = 0;
      for (int j = 1; j < m_; ++j) {
        for (int i = 1; i + j < m_; ++i) {
          const int dof = interior_offset_ + s * nint + q;
          nodes_[dof] = p[0] + (double(i) / m_) * (p[1] - p[0]) + (double(j) / m_) * (p[2] - p[0]);
          d[3 + 3 * per_edge + q] = dof;
          ++q;
        }
      }
    }
  }

  // Matrix of DOF functionals applied to the monomial basis of element k.
  DenseMatrix dof_matrix(int k) const {
    const Mesh& mesh = *mesh_;
    const MonomialBasis mono(m_, mesh.barycenter(k), mesh.element_diameter(k));
    const int p = mono.size();
    const auto pts = mesh.element_points(k);
    if (family_ == Family::lagrange) {
      DenseMatrix d(nloc_, p);
      const auto dofs = element_dofs(k);
      for (int i = 0; i < nloc_; ++i) d.row(i) = mono.values(nodes_[dofs[i]]).transpose();
      return d;
    }
    DenseMatrix d = DenseMatrix::Zero(nloc_, 2 * p);
    const auto& g = gauss_legendre(m_ + 1);
    const int per_edge = m_ + 1;
    for (int i = 0; i < 3; ++i) {
      const auto [a, b] = oriented_edge(k, i);
      const Vec2 t = (b - a).normalized();
      const Vec2 n(t.y(), -t.x());
      for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        const Vector v = mono.values(a + g.nodes[q] * (b - a));
        for (int j = 0; j < per_edge; ++j) {
          const double w = g.weights[q] * shifted_legendre(j, g.nodes[q]);
          d.block(i * per_edge + j, 0, 1, p) += w * n.x() * v.transpose();
          d.block(i * per_edge + j, p, 1, p) += w * n.y() * v.transpose();
        }
      }
    }
    const int nint = detail::bdm_interior_count(m_);
    if (nint > 0) {
      const double area = mesh.element_area(k);
      const auto rule = triangle_rule(pts[0], pts[1], pts[2], 2 * m_);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vector v = mono.values(rule.points[q]);
        const Eigen::MatrixX2d tests = detail::bdm_interior_tests(m_, mono, rule.points[q]);
        const double w = rule.weights[q] / area;
        for (int r = 0; r < nint; ++r) {
          d.block(3 * per_edge + r, 0, 1, p) += w * tests(r, 0) * v.transpose();
          d.block(3 * per_edge + r, p, 1, p) += w * tests(r, 1) * v.transpose();
        }
      }
    }
    return d;
  }

  void build_local_bases() {
    using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t, int>;
    std::map<Key, int> cache;
    shape_of_.resize(active_.size());
    for (std::size_t s = 0; s < active_.size(); ++s) {
      const int k = active_[s];
      const auto p = mesh_->element_points(k);
      const auto& t = mesh_->element(k);
      const double hk = mesh_->element_diameter(k);
      auto q = [hk](double v) { return static_cast<std::int64_t>(std::llround(v / hk * 1e9)); };
      const int orient = (t[1] < t[2]) | ((t[2] < t[0]) << 1) | ((t[0] < t[1]) << 2);
      const Key key{q(p[1].x() - p[0].x()), q(p[1].y() - p[0].y()), q(p[2].x() - p[0].x()),
                    q(p[2].y() - p[0].y()), orient};
      auto it = cache.find(key);
      if (it == cache.end()) {
        const DenseMatrix d = dof_matrix(k);
        Eigen::FullPivLU<DenseMatrix> lu(d);
        if (!lu.isInvertible()) throw Error("singular local DOF matrix on element " + std::to_string(k));
        shapes_.push_back(lu.inverse());
        it = cache.emplace(key, static_cast<int>(shapes_.size()) - 1).first;
      }
      shape_of_[s] = it->second;
    }
  }

  const Mesh* mesh_;
  Family family_;
  int m_;
  bool dirichlet_;
  std::vector<int> active_;
  std::vector<int> slot_;
  std::vector<int> edges_;
  std::vector<int> dofs_;
  std::vector<Vec2> nodes_;
  std::vector<char> dirichlet_mask_;
  std::vector<DenseMatrix> shapes_;
  std::vector<int> shape_of_;
  int nloc_ = 0;
  int ndofs_ = 0;
  int interior_offset_ = 0;
};

inline FESpace build_space(const Mesh& mesh, std::vector<int> active, Family family, int m, bool dirichlet = false) {
  return FESpace(mesh, std::move(active), family, m, dirichlet);
}

/// Coefficients of a field on the two overlapping subdomain spaces.
struct FieldPair {
  Vector coeffs0;
  Vector coeffs1;
};

/// Basis values at points of element k; points must lie in K up to 1e-10 in barycentric coordinates.
inline BasisValues eval_basis(const FESpace& space, int k, std::span<const Vec2> pts) {
  const Mesh& mesh = space.mesh();
  const ElementBasis b = space.basis(k);
  BasisValues out;
  for (const auto& x : pts) {
    for (double l : mesh.barycentric(k, x)) {
      if (l < -1e-10) throw ConfigError("eval_basis: point outside element " + std::to_string(k));
    }
    if (space.family() == Family::bdm) {
      Eigen::MatrixX2d v;
      Vector d;
      b.eval_bdm(x, v, d);
      out.value.push_back(std::move(v));
      out.div.push_back(std::move(d));
    } else {
      Vector v;
      Eigen::MatrixX2d g;
      b.eval_lagrange(x, v, g);
      Eigen::MatrixX2d vv = Eigen::MatrixX2d::Zero(v.size(), 2);
      vv.col(0) = v;
      out.value.push_back(std::move(vv));
      out.grad.push_back(std::move(g));
    }
  }
  return out;
}

/// Nodal interpolation of a scalar function into a Lagrange space.
inline Vector interpolate(const FESpace& space, const std::function<double(const Vec2&)>& f) {
  if (space.family() != Family::lagrange) throw ConfigError("scalar interpolation needs a Lagrange space");
  Vector x(space.num_dofs());
  for (int i = 0; i < space.num_dofs(); ++i) x[i] = f(space.node(i));
  return x;
}

/// Canonical (moment) interpolation of a vector field into a BDM space.
inline Vector interpolate(const FESpace& space, const std::function<Vec2(const Vec2&)>& f, int extra_degree = 6) {
  if (space.family() != Family::bdm) throw ConfigError("vector interpolation needs a BDM space");
  const Mesh& mesh = space.mesh();
  const int m = space.degree();
  const int per_edge = m + 1;
  Vector x = Vector::Zero(space.num_dofs());
  const auto& g = gauss_legendre(gauss_points_for_degree(2 * m + extra_degree));
  for (std::size_t c = 0; c < space.edges().size(); ++c) {
    const auto& ed = mesh.edge(space.edges()[c]);
    const Vec2& a = mesh.vertex(ed.vertices[0]);
    const Vec2& b = mesh.vertex(ed.vertices[1]);
    const Vec2 t = (b - a).normalized();
    const Vec2 n(t.y(), -t.x());
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const double fn = f(a + g.nodes[q] * (b - a)).dot(n);
      for (int j = 0; j < per_edge; ++j) x[c * per_edge + j] += g.weights[q] * shifted_legendre(j, g.nodes[q]) * fn;
    }
  }
  const int nint = detail::bdm_interior_count(m);
  if (nint > 0) {
    for (int k : space.active_elements()) {
      const auto p = mesh.element_points(k);
      const MonomialBasis frame(m, mesh.barycenter(k), mesh.element_diameter(k));
      const double area = mesh.element_area(k);
      const auto rule = triangle_rule(p[0], p[1], p[2], 2 * m + extra_degree);
      const auto dofs = space.element_dofs(k);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec2 fv = f(rule.points[q]);
        const Eigen::MatrixX2d tests = detail::bdm_interior_tests(m, frame, rule.points[q]);
        for (int r = 0; r < nint; ++r) {
          x[dofs[3 * per_edge + r]] += rule.weights[q] / area * (tests(r, 0) * fv.x() + tests(r, 1) * fv.y());
        }
      }
    }
  }
  return x;
}

/// Value of a BDM field (vector) or Lagrange field (scalar in x()) at x, using element k's polynomial.
inline Vec2 field_value(const FESpace& space, const Vector& coeffs, int k, const Vec2& x) {
  const ElementBasis b = space.basis(k);
  const auto dofs = space.element_dofs(k);
  Vector local(b.ndof);
  for (int i = 0; i < b.ndof; ++i) local[i] = coeffs[dofs[i]];
  if (space.family() == Family::bdm) {
    Eigen::MatrixX2d v;
    Vector d;
    b.eval_bdm(x, v, d);
    return v.transpose() * local;
  }
  Vector v;
  Eigen::MatrixX2d g;
  b.eval_lagrange(x, v, g);
  return {v.dot(local), 0.0};
}

}  // namespace lsfem
