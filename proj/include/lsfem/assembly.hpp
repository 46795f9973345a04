#pragma once

#include "lsfem/cutfem_geom.hpp"
#include "lsfem/elasticity.hpp"
#include "lsfem/fem_spaces.hpp"
#include "lsfem/ghost_penalty.hpp"
#include "lsfem/linalg.hpp"
#include "lsfem/parallel.hpp"

#include <algorithm>
#include <array>
#include <vector>

namespace lsfem {

/// Interface stress-jump weight: 1 for the L2 method, h for the L2 part of the minus-norm method.
enum class L2Mode { method, part };

/// Mesh, interface, cut classification and the four subdomain spaces of one run.
struct Discretization {
  const Mesh* mesh = nullptr;
  Interface iface;
  CutClassification cls;
  int m = 1;
  int quad_extra = 2;
  std::vector<FESpace> stress;  // per side: BDM_m on covered_i, one copy per stress column
  std::vector<FESpace> disp;    // per side: P_m on covered_i, one copy per component

  double h() const { return mesh->h(); }
  int bulk_degree() const { return 2 * m + quad_extra; }
};

inline Discretization discretize(const Mesh& mesh, const Interface& iface, int m, const GeometryOptions& geo = {},
                                 int quad_extra = 2) {
  Discretization d;
  d.mesh = &mesh;
  d.iface = iface;
  d.m = m;
  d.quad_extra = quad_extra;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& el = mesh.element(k);
    for (int e = 0; e < 3; ++e) {
      const int a = el[e], b = el[(e + 1) % 3];
      if (!mesh.vertex_on_boundary(a) || !mesh.vertex_on_boundary(b)) continue;
      const Vec2 pa = mesh.vertex(a), pb = mesh.vertex(b);
      if ((pa - pb).cwiseAbs().minCoeff() > 1e-12) continue;
      for (int s = 0; s <= 16; ++s) {
        if (iface.value(pa + (pb - pa) * (s / 16.0)) <= 0.0) {
          throw ConfigError("the interface must stay inside the domain (subdomain 0 reaches the boundary)");
        }
      }
    }
  }
  d.cls = classify(mesh, iface, geo);
  if (d.cls.interior0.empty() && d.cls.cut.empty()) throw ConfigError("the interface does not enclose any element");
  for (int k : d.cls.covered0) {
    for (int v : mesh.element(k)) {
      if (mesh.vertex_on_boundary(v)) {
        throw ConfigError("the interface must stay inside the domain (element " + std::to_string(k) +
                          " of subdomain 0 touches the boundary)");
      }
    }
  }
  for (int i = 0; i < 2; ++i) {
    d.stress.emplace_back(mesh, d.cls.covered(i), Family::bdm, m);
    d.disp.emplace_back(mesh, d.cls.covered(i), Family::lagrange, m, i == 1);
  }
  return d;
}

enum class Field { stress, displacement };

/// Global unknown ordering [stress_0 | stress_1 | u_0 | u_1], two blocks each
/// (stress columns, displacement components). Dirichlet DOFs of u_1 are eliminated.
class SystemLayout {
 public:
  static constexpr int kBlocks = 8;

  static int block(Field f, int side, int comp) { return (f == Field::displacement ? 4 : 0) + 2 * side + comp; }

  explicit SystemLayout(const Discretization& d) {
    offset_[0] = 0;
    for (int b = 0; b < kBlocks; ++b) {
      const FESpace& s = space(d, b);
      offset_[b + 1] = offset_[b] + s.num_dofs();
    }
    code_.resize(offset_[kBlocks]);
    for (int b = 0; b < kBlocks; ++b) {
      const FESpace& s = space(d, b);
      for (int i = 0; i < s.num_dofs(); ++i) {
        if (s.is_dirichlet(i)) {
          code_[offset_[b] + i] = -1 - static_cast<int>(dirichlet_.size());
          dirichlet_.push_back(offset_[b] + i);
        } else {
          code_[offset_[b] + i] = static_cast<int>(free_.size());
          free_.push_back(offset_[b] + i);
        }
      }
    }
  }

  static const FESpace& space(const Discretization& d, int b) {
    const int side = (b / 2) % 2;
    return b < 4 ? d.stress[side] : d.disp[side];
  }

  int size() const { return static_cast<int>(free_.size()); }
  int full_size() const { return offset_[kBlocks]; }
  int num_dirichlet() const { return static_cast<int>(dirichlet_.size()); }
  int block_offset(int b) const { return offset_[b]; }
  int block_size(int b) const { return offset_[b + 1] - offset_[b]; }

  /// Reduced index of DOF i of block b, or -1 - (Dirichlet slot) for an eliminated DOF.
  int code(int b, int i) const { return code_[offset_[b] + i]; }

  std::pair<int, int> locate_full(int full) const {
    const int b = static_cast<int>(std::upper_bound(offset_.begin(), offset_.end(), full) - offset_.begin()) - 1;
    return {b, full - offset_[b]};
  }
  std::pair<int, int> locate(int reduced) const { return locate_full(free_[reduced]); }
  std::pair<int, int> locate_dirichlet(int slot) const { return locate_full(dirichlet_[slot]); }

  /// Exact displacement trace at the Dirichlet nodes.
  Vector dirichlet_values(const Discretization& d, const ManufacturedCase& c) const {
    Vector g(num_dirichlet());
    for (int s = 0; s < num_dirichlet(); ++s) {
      const auto [b, i] = locate_dirichlet(s);
      const int side = (b / 2) % 2;
      g[s] = c.u(side, space(d, b).node(i))[b % 2];
    }
    return g;
  }

  /// Full coefficient vector from free values and Dirichlet values.
  Vector expand(const Vector& x, const Vector& g) const {
    Vector full(full_size());
    for (int r = 0; r < size(); ++r) full[free_[r]] = x[r];
    for (int s = 0; s < num_dirichlet(); ++s) full[dirichlet_[s]] = g[s];
    return full;
  }

  /// Free values from a full coefficient vector.
  Vector restrict(const Vector& full) const {
    Vector x(size());
    for (int r = 0; r < size(); ++r) x[r] = full[free_[r]];
    return x;
  }

  Vector block_coeffs(const Vector& full, int b) const { return full.segment(offset_[b], block_size(b)); }

 private:
  std::array<int, kBlocks + 1> offset_{};
  std::vector<int> code_;
  std::vector<int> free_;
  std::vector<int> dirichlet_;
};

/// Reduced matrix plus its coupling to the eliminated Dirichlet DOFs.
struct L2System {
  SparseMatrix A;        // free x free
  SparseMatrix A_fd;     // free x Dirichlet
};

namespace detail {

/// Local-to-global codes of side i on element k: [stress col 0, col 1, u comp 0, comp 1].
inline std::vector<int> side_codes(const Discretization& d, const SystemLayout& L, int side, int k) {
  std::vector<int> codes;
  for (int c = 0; c < 2; ++c) {
    for (int dof : d.stress[side].element_dofs(k)) codes.push_back(L.code(SystemLayout::block(Field::stress, side, c), dof));
  }
  for (int c = 0; c < 2; ++c) {
    for (int dof : d.disp[side].element_dofs(k)) {
      codes.push_back(L.code(SystemLayout::block(Field::displacement, side, c), dof));
    }
  }
  return codes;
}

/// Column index of a code in the [free | Dirichlet] widened matrix.
inline int widened(const SystemLayout& L, int code) { return code >= 0 ? code : L.size() - 1 - code; }

inline void scatter(const SystemLayout& L, const std::vector<int>& codes, const DenseMatrix& M,
                    std::vector<Triplet>& out) {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] < 0) continue;
    for (std::size_t j = 0; j < codes.size(); ++j) {
      const double v = M(i, j);
      if (v != 0.0) out.emplace_back(codes[i], widened(L, codes[j]), v);
    }
  }
}

inline void scatter(const std::vector<int>& codes, const Vector& F, std::vector<std::pair<int, double>>& out) {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] >= 0 && F[i] != 0.0) out.emplace_back(codes[i], F[i]);
  }
}

/// Basis data of one side at one point.
struct SideBasis {
  Eigen::MatrixX2d sv;  // stress column basis values
  Vector sdiv;
  Vector uv;            // displacement component basis values
  Eigen::MatrixX2d ug;

  void eval(const ElementBasis& bs, const ElementBasis& bu, const Vec2& x) {
    bs.eval_bdm(x, sv, sdiv);
    bu.eval_lagrange(x, uv, ug);
  }
  int nb() const { return static_cast<int>(sv.rows()); }
  int nl() const { return static_cast<int>(uv.size()); }
  int size() const { return 2 * nb() + 2 * nl(); }
};

/// Rows (00, 01, 10, 11) of A tau - eps(v), and rows of div tau, over the local side unknowns.
inline void bulk_rows(const SideBasis& s, double lambda, double mu, DenseMatrix& R, DenseMatrix& D) {
  const int nb = s.nb(), nl = s.nl();
  const double c = lambda / (2.0 * lambda + 2.0 * mu);
  const double k = 1.0 / (2.0 * mu);
  R.setZero(4, s.size());
  D.setZero(2, s.size());
  for (int a = 0; a < nb; ++a) {
    const double px = s.sv(a, 0), py = s.sv(a, 1);
    R(0, a) = (1.0 - c) * px * k;
    R(2, a) = py * k;
    R(3, a) = -c * px * k;
    D(0, a) = s.sdiv[a];
    R(1, nb + a) = px * k;
    R(3, nb + a) = (1.0 - c) * py * k;
    R(0, nb + a) = -c * py * k;
    D(1, nb + a) = s.sdiv[a];
  }
  for (int b = 0; b < nl; ++b) {
    const double gx = s.ug(b, 0), gy = s.ug(b, 1);
    const int i0 = 2 * nb + b, i1 = 2 * nb + nl + b;
    R(0, i0) -= gx;
    R(1, i0) -= 0.5 * gy;
    R(2, i0) -= 0.5 * gy;
    R(1, i1) -= 0.5 * gx;
    R(2, i1) -= 0.5 * gx;
    R(3, i1) -= gy;
  }
}

/// Jump rows over [side 0 | side 1] unknowns: normal stress jump (2), displacement jump (2),
/// tangential gradient jump (4, component-major).
inline void interface_rows(const SideBasis (&s)[2], const Vec2& n, DenseMatrix& Js, DenseMatrix& Ju,
                           DenseMatrix& Jg) {
  const int n0 = s[0].size();
  const int ntot = n0 + s[1].size();
  Js.setZero(2, ntot);
  Ju.setZero(2, ntot);
  Jg.setZero(4, ntot);
  const Mat2 P = Mat2::Identity() - n * n.transpose();
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    const int off = side == 0 ? 0 : n0;
    const int nb = s[side].nb(), nl = s[side].nl();
    const Vector sn = s[side].sv * n;
    for (int c = 0; c < 2; ++c) {
      Js.row(c).segment(off + c * nb, nb) = sign * sn.transpose();
      Ju.row(c).segment(off + 2 * nb + c * nl, nl) = sign * s[side].uv.transpose();
      const Eigen::MatrixX2d tg = s[side].ug * P;
      Jg.row(2 * c).segment(off + 2 * nb + c * nl, nl) = sign * tg.col(0).transpose();
      Jg.row(2 * c + 1).segment(off + 2 * nb + c * nl, nl) = sign * tg.col(1).transpose();
    }
  }
}

inline double stress_jump_weight(const Discretization& d, L2Mode mode) { return mode == L2Mode::method ? 1.0 : d.h(); }

/// Adds one side-0/side-1 penalty block pair into the widened triplet list.
inline void scatter_penalty(const SystemLayout& L, const SparseMatrix& P, Field f, int side,
                            std::vector<Triplet>& out) {
  for (int c = 0; c < 2; ++c) {
    const int b = SystemLayout::block(f, side, c);
    for (int col = 0; col < P.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(P, col); it; ++it) {
        const int ci = L.code(b, static_cast<int>(it.row()));
        if (ci < 0) continue;
        out.emplace_back(ci, widened(L, L.code(b, col)), it.value());
      }
    }
  }
}

}  // namespace detail

/// The L2 bilinear form: least-squares residuals on both sides, interface jump terms
/// and ghost penalties, restricted to the free DOFs.
inline L2System assemble_l2_system(const Discretization& d, const SystemLayout& L, const Material& mat, L2Mode mode) {
  const Mesh& mesh = *d.mesh;
  const double h = d.h();
  const double ws = detail::stress_jump_weight(d, mode);
  const int deg = d.bulk_degree();
  const int nw = L.size() + L.num_dirichlet();
  SparseMatrix W = assemble_sparse(L.size(), nw, mesh.num_elements(), [&](int k, std::vector<Triplet>& out) {
    detail::SideBasis sb[2];
    DenseMatrix R, D, M;
    for (int i = 0; i < 2; ++i) {
      if (!d.cls.covers(i, k)) continue;
      const auto rule = bulk_cut_quadrature(mesh, d.cls, k, i, deg);
      if (rule.empty()) continue;
      const ElementBasis bs = d.stress[i].basis(k), bu = d.disp[i].basis(k);
      M.setZero(0, 0);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        sb[i].eval(bs, bu, rule.points[q]);
        detail::bulk_rows(sb[i], mat.lambda(i), mat.mu(i), R, D);
        if (M.size() == 0) M.setZero(R.cols(), R.cols());
        M.noalias() += rule.weights[q] * (R.transpose() * R + D.transpose() * D);
      }
      detail::scatter(L, detail::side_codes(d, L, i, k), M, out);
    }
    if (!d.cls.is_cut(k)) return;
    const auto rule = interface_quadrature(d.iface, d.cls, k, deg);
    if (rule.empty()) return;
    ElementBasis bs[2] = {d.stress[0].basis(k), d.stress[1].basis(k)};
    ElementBasis bu[2] = {d.disp[0].basis(k), d.disp[1].basis(k)};
    DenseMatrix Js, Ju, Jg;
    M.setZero(0, 0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      for (int i = 0; i < 2; ++i) sb[i].eval(bs[i], bu[i], rule.points[q]);
      detail::interface_rows(sb, rule.normals[q], Js, Ju, Jg);
      if (M.size() == 0) M.setZero(Js.cols(), Js.cols());
      M.noalias() += rule.weights[q] *
                     (ws * Js.transpose() * Js + (1.0 / h) * Ju.transpose() * Ju + h * Jg.transpose() * Jg);
    }
    std::vector<int> codes = detail::side_codes(d, L, 0, k);
    const auto c1 = detail::side_codes(d, L, 1, k);
    codes.insert(codes.end(), c1.begin(), c1.end());
    detail::scatter(L, codes, M, out);
  });
  std::vector<Triplet> pen;
  for (int i = 0; i < 2; ++i) {
    detail::scatter_penalty(L, assemble_penalty(d.stress[i], d.cls, d.m, i), Field::stress, i, pen);
    detail::scatter_penalty(L, assemble_penalty(d.disp[i], d.cls, d.m, i), Field::displacement, i, pen);
  }
  SparseMatrix P(L.size(), nw);
  P.setFromTriplets(pen.begin(), pen.end());
  W += P;
  L2System sys;
  sys.A = W.leftCols(L.size());
  sys.A_fd = W.rightCols(L.num_dirichlet());
  sys.A.makeCompressed();
  return sys;
}

/// Load vector before Dirichlet lifting: -(div tau, f) + w_s (jump_N tau, a) + h^-1 (jump v, b)
/// + h (jump grad_G v, grad_G b), with w_s as in the bilinear form.
inline Vector assemble_l2_load(const Discretization& d, const SystemLayout& L, const ManufacturedCase& cs,
                               L2Mode mode) {
  const Mesh& mesh = *d.mesh;
  const double h = d.h();
  const double ws = detail::stress_jump_weight(d, mode);
  const int deg = d.bulk_degree() + 2;
  return assemble_vector(L.size(), mesh.num_elements(), [&](int k, std::vector<std::pair<int, double>>& out) {
    detail::SideBasis sb[2];
    DenseMatrix R, D;
    for (int i = 0; i < 2; ++i) {
      if (!d.cls.covers(i, k)) continue;
      const auto rule = bulk_cut_quadrature(mesh, d.cls, k, i, deg);
      if (rule.empty()) continue;
      const ElementBasis bs = d.stress[i].basis(k), bu = d.disp[i].basis(k);
      Vector F;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        sb[i].eval(bs, bu, rule.points[q]);
        detail::bulk_rows(sb[i], 1.0, 1.0, R, D);
        if (F.size() == 0) F.setZero(D.cols());
        F.noalias() -= rule.weights[q] * (D.transpose() * cs.f(i, rule.points[q]));
      }
      detail::scatter(detail::side_codes(d, L, i, k), F, out);
    }
    if (!d.cls.is_cut(k)) return;
    const auto rule = interface_quadrature(d.iface, d.cls, k, deg);
    if (rule.empty()) return;
    ElementBasis bs[2] = {d.stress[0].basis(k), d.stress[1].basis(k)};
    ElementBasis bu[2] = {d.disp[0].basis(k), d.disp[1].basis(k)};
    DenseMatrix Js, Ju, Jg;
    Vector F;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2& x = rule.points[q];
      const Vec2& n = rule.normals[q];
      for (int i = 0; i < 2; ++i) sb[i].eval(bs[i], bu[i], x);
      detail::interface_rows(sb, n, Js, Ju, Jg);
      if (F.size() == 0) F.setZero(Js.cols());
      const Mat2 gb = cs.grad_gamma_b(x, n);
      const Eigen::Vector4d g(gb(0, 0), gb(0, 1), gb(1, 0), gb(1, 1));
      F.noalias() += rule.weights[q] * (ws * Js.transpose() * cs.a(x, n) + (1.0 / h) * Ju.transpose() * cs.b(x) +
                                        h * Jg.transpose() * g);
    }
    std::vector<int> codes = detail::side_codes(d, L, 0, k);
    const auto c1 = detail::side_codes(d, L, 1, k);
    codes.insert(codes.end(), c1.begin(), c1.end());
    detail::scatter(codes, F, out);
  });
}

/// Right-hand side on the free DOFs, including the Dirichlet lifting.
inline Vector assemble_l2_rhs(const Discretization& d, const SystemLayout& L, const ManufacturedCase& cs, L2Mode mode,
                              const L2System& sys) {
  Vector rhs = assemble_l2_load(d, L, cs, mode);
  if (L.num_dirichlet() > 0) rhs -= sys.A_fd * L.dirichlet_values(d, cs);
  return rhs;
}

/// B (stabilized H1 problem on subdomain 0, P1 vector field), C (interface coupling of the
/// normal stress jump with B's test functions) and a factorization of B.
struct MinusNormOperator {
  FESpace space;  // scalar P1 on covered_0; vector unknowns are [comp 0 | comp 1]
  SparseMatrix B;
  SparseMatrix C;
  Factorization factor;

  int size() const { return 2 * space.num_dofs(); }

  Vector solve(const Vector& g) const { return factor.solve(g); }

  /// C^T B^-1 C x.
  Vector apply(const Vector& x) const { return C.transpose() * solve(C * x); }

  /// g^T B^-1 g for a moment vector g.
  double norm2(const Vector& g) const { return g.dot(solve(g)); }
};

/// Moments (v, psi)_Gamma of an interface field v(x, n) against the P1 test functions of B.
template <class Fn>
Vector interface_moments(const Discretization& d, const FESpace& p1, Fn&& v) {
  const int n1 = p1.num_dofs();
  const int deg = d.bulk_degree() + 2;
  return assemble_vector(2 * n1, static_cast<int>(d.cls.cut.size()), [&](int idx, std::vector<std::pair<int, double>>& out) {
    const int k = d.cls.cut[idx];
    const auto rule = interface_quadrature(d.iface, d.cls, k, deg);
    const ElementBasis b = p1.basis(k);
    const auto dofs = p1.element_dofs(k);
    Vector val;
    Eigen::MatrixX2d grad;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      b.eval_lagrange(rule.points[q], val, grad);
      const Vec2 f = v(rule.points[q], rule.normals[q]);
      for (int c = 0; c < 2; ++c) {
        for (std::size_t a = 0; a < dofs.size(); ++a) out.emplace_back(c * n1 + dofs[a], rule.weights[q] * f[c] * val[a]);
      }
    }
  });
}

inline MinusNormOperator assemble_minus_norm(const Discretization& d, const SystemLayout& L) {
  const Mesh& mesh = *d.mesh;
  FESpace p1(mesh, d.cls.covered0, Family::lagrange, 1);
  const int n1 = p1.num_dofs();
  const int deg = 2 + d.quad_extra;
  SparseMatrix Bs = assemble_sparse(n1, n1, static_cast<int>(d.cls.covered0.size()), [&](int idx, std::vector<Triplet>& out) {
    const int k = d.cls.covered0[idx];
    const auto rule = bulk_cut_quadrature(mesh, d.cls, k, 0, deg);
    if (rule.empty()) return;
    const ElementBasis b = p1.basis(k);
    const auto dofs = p1.element_dofs(k);
    DenseMatrix M = DenseMatrix::Zero(dofs.size(), dofs.size());
    Vector val;
    Eigen::MatrixX2d grad;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      b.eval_lagrange(rule.points[q], val, grad);
      M.noalias() += rule.weights[q] * (grad * grad.transpose() + val * val.transpose());
    }
    for (std::size_t i = 0; i < dofs.size(); ++i) {
      for (std::size_t j = 0; j < dofs.size(); ++j) out.emplace_back(dofs[i], dofs[j], M(i, j));
    }
  });
  Bs += assemble_penalty(p1, d.cls, 1, 0);
  std::vector<Triplet> bt;
  for (int c = 0; c < 2; ++c) {
    for (int col = 0; col < Bs.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(Bs, col); it; ++it) {
        bt.emplace_back(c * n1 + static_cast<int>(it.row()), c * n1 + col, it.value());
      }
    }
  }
  MinusNormOperator op{p1, SparseMatrix(2 * n1, 2 * n1), SparseMatrix(), Factorization()};
  op.B.setFromTriplets(bt.begin(), bt.end());

  const int ideg = d.bulk_degree();
  op.C = assemble_sparse(2 * n1, L.size(), static_cast<int>(d.cls.cut.size()), [&](int idx, std::vector<Triplet>& out) {
    const int k = d.cls.cut[idx];
    const auto rule = interface_quadrature(d.iface, d.cls, k, ideg);
    if (rule.empty()) return;
    const ElementBasis bp = p1.basis(k);
    const auto pd = p1.element_dofs(k);
    ElementBasis bs[2] = {d.stress[0].basis(k), d.stress[1].basis(k)};
    const int nb = bs[0].ndof;
    DenseMatrix M = DenseMatrix::Zero(2 * pd.size(), 4 * nb);
    Vector val, div;
    Eigen::MatrixX2d grad, sv;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2& x = rule.points[q];
      bp.eval_lagrange(x, val, grad);
      for (int i = 0; i < 2; ++i) {
        bs[i].eval_bdm(x, sv, div);
        const Vector sn = (i == 0 ? 1.0 : -1.0) * rule.weights[q] * (sv * rule.normals[q]);
        for (int c = 0; c < 2; ++c) {
          M.block(c * pd.size(), (2 * i + c) * nb, pd.size(), nb).noalias() += val * sn.transpose();
        }
      }
    }
    const int np = static_cast<int>(pd.size());
    for (int i = 0; i < 2; ++i) {
      const auto sd = d.stress[i].element_dofs(k);
      for (int c = 0; c < 2; ++c) {
        for (int j = 0; j < nb; ++j) {
          const int col = L.code(SystemLayout::block(Field::stress, i, c), sd[j]);
          if (col < 0) continue;
          for (int a = 0; a < np; ++a) {
            const double v = M(c * np + a, (2 * i + c) * nb + j);
            if (v != 0.0) out.emplace_back(c * n1 + pd[a], col, v);
          }
        }
      }
    }
  });
  op.factor = Factorization(op.B);
  return op;
}

/// y = A_L2 x + C^T B^-1 C x.
inline Vector apply_tilde(const SparseMatrix& A_l2, const MinusNormOperator& mno, const Vector& x) {
  if (x.size() != A_l2.cols()) throw ConfigError("apply_tilde: vector has the wrong size");
  return A_l2 * x + mno.apply(x);
}

/// L2-part right-hand side plus the minus-norm data term C^T B^-1 g_a.
inline Vector assemble_tilde_rhs(const Discretization& d, const SystemLayout& L, const ManufacturedCase& cs,
                                 const MinusNormOperator& mno, const L2System& part) {
  Vector rhs = assemble_l2_rhs(d, L, cs, L2Mode::part, part);
  const Vector ga = interface_moments(d, mno.space, [&](const Vec2& x, const Vec2& n) { return cs.a(x, n); });
  rhs += mno.C.transpose() * mno.solve(ga);
  return rhs;
}

/// Solution fields: coeffs[side][comp] for the stress columns and displacement components.
struct DiscreteSolution {
  std::array<std::array<Vector, 2>, 2> sigma;
  std::array<std::array<Vector, 2>, 2> u;
};

inline DiscreteSolution split_solution(const SystemLayout& L, const Vector& full) {
  DiscreteSolution s;
  for (int i = 0; i < 2; ++i) {
    for (int c = 0; c < 2; ++c) {
      s.sigma[i][c] = L.block_coeffs(full, SystemLayout::block(Field::stress, i, c));
      s.u[i][c] = L.block_coeffs(full, SystemLayout::block(Field::displacement, i, c));
    }
  }
  return s;
}

/// Canonical interpolant of the exact solution (side i fields extend u_i, sigma_i over covered_i).
inline Vector interpolate_exact(const Discretization& d, const SystemLayout& L, const ManufacturedCase& cs) {
  Vector full(L.full_size());
  for (int i = 0; i < 2; ++i) {
    for (int c = 0; c < 2; ++c) {
      const int bs = SystemLayout::block(Field::stress, i, c);
      full.segment(L.block_offset(bs), L.block_size(bs)) =
          interpolate(d.stress[i], std::function<Vec2(const Vec2&)>([&](const Vec2& x) -> Vec2 {
                        return cs.sigma(i, x).col(c);
                      }));
      const int bu = SystemLayout::block(Field::displacement, i, c);
      full.segment(L.block_offset(bu), L.block_size(bu)) =
          interpolate(d.disp[i], std::function<double(const Vec2&)>([&](const Vec2& x) { return cs.u(i, x)[c]; }));
    }
  }
  return full;
}

}  // namespace lsfem
