#pragma once

#include "lsfem/cutfem_geom.hpp"
#include "lsfem/fem_spaces.hpp"
#include "lsfem/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>

namespace lsfem {

/// L2 projection onto P_r on an anchor element, evaluable at any point.
struct ExtensionOperator {
  int anchor = -1;
  int degree = 0;
  MonomialBasis mono;
  DenseMatrix coeffs;  // monomial coefficients, one column per field component

  Vector operator()(const Vec2& x) const { return coeffs.transpose() * mono.values(x); }
};

namespace detail {

inline int components(const FESpace& s) { return s.family() == Family::bdm ? 2 : 1; }

/// Maps the element DOFs of anchor k to P_r monomial coefficients, one block per component:
/// rows [c*P, (c+1)*P) give the projection of component c.
inline DenseMatrix projection_matrix(const FESpace& space, int k, int r, MonomialBasis& mono) {
  const Mesh& mesh = space.mesh();
  mono = MonomialBasis(r, mesh.barycenter(k), mesh.element_diameter(k));
  const int p = mono.size();
  const int nc = components(space);
  const ElementBasis b = space.basis(k);
  const auto pts = mesh.element_points(k);
  const auto rule = triangle_rule(pts[0], pts[1], pts[2], 2 * std::max(space.degree(), r) + 2);
  DenseMatrix mass = DenseMatrix::Zero(p, p);
  DenseMatrix rhs = DenseMatrix::Zero(nc * p, b.ndof);
  Eigen::MatrixX2d bv, bg;
  Vector bd, lv;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vector phi = mono.values(rule.points[q]);
    mass.noalias() += rule.weights[q] * phi * phi.transpose();
    if (space.family() == Family::bdm) {
      b.eval_bdm(rule.points[q], bv, bd);
      for (int c = 0; c < nc; ++c) rhs.middleRows(c * p, p).noalias() += rule.weights[q] * phi * bv.col(c).transpose();
    } else {
      b.eval_lagrange(rule.points[q], lv, bg);
      rhs.noalias() += rule.weights[q] * phi * lv.transpose();
    }
  }
  Eigen::LDLT<DenseMatrix> ldlt(mass);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw Error("singular local mass matrix on element " + std::to_string(k));
  }
  DenseMatrix out(nc * p, b.ndof);
  for (int c = 0; c < nc; ++c) out.middleRows(c * p, p) = ldlt.solve(rhs.middleRows(c * p, p));
  return out;
}

}  // namespace detail

/// E_K^r of the field with coefficients `coeffs`, taken on anchor element k.
inline ExtensionOperator local_extension(const FESpace& space, const Vector& coeffs, int k, int r) {
  ExtensionOperator e;
  e.anchor = k;
  e.degree = r;
  const DenseMatrix proj = detail::projection_matrix(space, k, r, e.mono);
  const auto dofs = space.element_dofs(k);
  Vector local(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) local[i] = coeffs[dofs[i]];
  const int p = e.mono.size();
  const int nc = detail::components(space);
  e.coeffs.resize(p, nc);
  for (int c = 0; c < nc; ++c) e.coeffs.col(c) = proj.middleRows(c * p, p) * local;
  return e;
}

namespace detail {

/// Calls f(dofs, row, weight) for every quadrature point and component on cut element
/// cls.cut[idx], where row . x_dofs = (v - E v)(x) for the field with coefficients x.
template <class F>
void penalty_rows(const FESpace& space, const CutClassification& cls, int r, int side, int idx, F&& f) {
  const Mesh& mesh = space.mesh();
  const int nc = components(space);
  const int k = cls.cut[idx];
  const int a = cls.anchor(side, k);
  MonomialBasis mono;
  const DenseMatrix proj = projection_matrix(space, a, r, mono);
  const int p = mono.size();
  const ElementBasis bk = space.basis(k);
  const auto dk = space.element_dofs(k);
  const auto da = space.element_dofs(a);
  std::vector<int> dofs(dk.begin(), dk.end());
  for (int d : da) {
    if (std::find(dofs.begin(), dofs.end(), d) == dofs.end()) dofs.push_back(d);
  }
  std::vector<int> pos_a(da.size());
  for (std::size_t j = 0; j < da.size(); ++j) {
    pos_a[j] = static_cast<int>(std::find(dofs.begin(), dofs.end(), da[j]) - dofs.begin());
  }
  const auto pts = mesh.element_points(k);
  const auto rule = triangle_rule(pts[0], pts[1], pts[2], 2 * std::max(space.degree(), r) + 2);
  Eigen::MatrixX2d bv, bg;
  Vector bd, lv, row(dofs.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2& x = rule.points[q];
    const Vector phi = mono.values(x);
    if (space.family() == Family::bdm) {
      bk.eval_bdm(x, bv, bd);
    } else {
      bk.eval_lagrange(x, lv, bg);
    }
    for (int c = 0; c < nc; ++c) {
      row.setZero();
      row.head(dk.size()) = space.family() == Family::bdm ? Vector(bv.col(c)) : lv;
      const Vector ext = proj.middleRows(c * p, p).transpose() * phi;
      for (std::size_t j = 0; j < da.size(); ++j) row[pos_a[j]] -= ext[j];
      f(dofs, row, rule.weights[q]);
    }
  }
}

}  // namespace detail

/// s_{h,i}^r(v, w) = sum over cut K of int_K (v - E v).(w - E w), with E taken on M^i(K).
inline SparseMatrix assemble_penalty(const FESpace& space, const CutClassification& cls, int r, int side) {
  const int n = space.num_dofs();
  return assemble_sparse(n, n, static_cast<int>(cls.cut.size()), [&](int idx, std::vector<Triplet>& out) {
    DenseMatrix local;
    std::vector<int> gl;
    detail::penalty_rows(space, cls, r, side, idx, [&](const std::vector<int>& dofs, const Vector& row, double w) {
      if (local.size() == 0) {
        local = DenseMatrix::Zero(row.size(), row.size());
        gl = dofs;
      }
      const Vector wr = std::sqrt(w) * row;
      local.noalias() += wr * wr.transpose();
    });
    for (int i = 0; i < local.rows(); ++i) {
      for (int j = 0; j < local.cols(); ++j) out.emplace_back(gl[i], gl[j], local(i, j));
    }
  });
}

/// s_{h,i}^r(v, v) as a sum of squares, without forming the matrix.
inline double penalty_energy(const FESpace& space, const CutClassification& cls, int r, int side, const Vector& x) {
  double s = 0.0;
  for (std::size_t idx = 0; idx < cls.cut.size(); ++idx) {
    detail::penalty_rows(space, cls, r, side, static_cast<int>(idx),
                         [&](const std::vector<int>& dofs, const Vector& row, double w) {
                           double v = 0.0;
                           for (std::size_t i = 0; i < dofs.size(); ++i) v += row[i] * x[dofs[i]];
                           s += w * v * v;
                         });
  }
  return s;
}

}  // namespace lsfem
