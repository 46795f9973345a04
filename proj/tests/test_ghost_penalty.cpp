#include "lsfem/ghost_penalty.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace lsfem;

namespace {

// Independent L2 projection of a scalar function onto P_r of triangle p, via
// normal equations in unscaled monomials x^a y^b and a degree-20 rule.
std::function<double(const Vec2&)> dense_projection(const std::array<Vec2, 3>& p, int r,
                                                    const std::function<double(const Vec2&)>& f) {
  std::vector<std::array<int, 2>> pw;
  for (int d = 0; d <= r; ++d)
    for (int b = 0; b <= d; ++b) pw.push_back({d - b, b});
  const int n = static_cast<int>(pw.size());
  auto mono = [pw, n](const Vec2& x) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = std::pow(x.x(), pw[i][0]) * std::pow(x.y(), pw[i][1]);
    return v;
  };
  const auto q = triangle_rule(p[0], p[1], p[2], 20);
  DenseMatrix m = DenseMatrix::Zero(n, n);
  Vector b = Vector::Zero(n);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Vector v = mono(q.points[i]);
    m += q.weights[i] * v * v.transpose();
    b += q.weights[i] * f(q.points[i]) * v;
  }
  const Vector c = m.fullPivLu().solve(b);
  return [mono, c](const Vec2& x) { return mono(x).dot(c); };
}

std::vector<int> all_elements(const Mesh& m) {
  std::vector<int> a(m.num_elements());
  for (int k = 0; k < m.num_elements(); ++k) a[k] = k;
  return a;
}

struct CircleCase {
  Mesh mesh = build_uniform({}, 10);
  Interface iface = Interface::circle({0, 0}, 0.7);
  CutClassification cls = classify(mesh, iface);
};

}  // namespace

TEST(Extension, ReproducesPolynomials) {
  const Mesh m = build_uniform({}, 4);
  for (int deg = 1; deg <= 3; ++deg) {
    const auto s = build_space(m, all_elements(m), Family::lagrange, deg);
    auto f = [deg](const Vec2& x) { return deg == 1 ? 1 + x.x() - 2 * x.y() : std::pow(x.x() - 0.3, deg) + x.y(); };
    const Vector c = interpolate(s, f);
    const auto e = local_extension(s, c, 5, deg);
    for (const Vec2& x : {Vec2(0.9, -0.8), Vec2(-1, 1), Vec2(0.1, 0.2)}) EXPECT_NEAR(e(x)[0], f(x), 1e-11);
    const auto b = build_space(m, all_elements(m), Family::bdm, deg);
    auto g = [deg](const Vec2& x) { return Vec2(std::pow(x.y(), deg) - x.x(), 2 + std::pow(x.x(), deg)); };
    const Vector cb = interpolate(b, g);
    const auto eb = local_extension(b, cb, 11, deg);
    for (const Vec2& x : {Vec2(0.9, -0.8), Vec2(-1, 1)}) EXPECT_NEAR((Vec2(eb(x)) - g(x)).norm(), 0.0, 1e-11);
  }
}

TEST(Extension, MatchesDenseProjection) {
  const Mesh t({0, 1, 0, 1}, {{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
  const auto s = build_space(t, {0}, Family::lagrange, 2);
  auto f = [](const Vec2& x) { return x.x() * x.x(); };
  const Vector c = interpolate(s, f);
  const auto e = local_extension(s, c, 0, 1);
  const auto oracle = dense_projection(t.element_points(0), 1, f);
  for (const Vec2& x : {Vec2(0, 0), Vec2(0.2, 0.3), Vec2(1.5, -2.0)}) EXPECT_NEAR(e(x)[0], oracle(x), 1e-10);
}

TEST(Extension, Stability) {
  const Mesh m = build_uniform({}, 6);
  const auto s = build_space(m, all_elements(m), Family::lagrange, 2);
  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  const int k = 30;
  const auto nb = m.delta_neighborhood(k);
  for (int t = 0; t < 100; ++t) {
    Vector c(s.num_dofs());
    for (int i = 0; i < c.size(); ++i) c[i] = nd(rng);
    const auto e = local_extension(s, c, k, 2);
    auto l2 = [&](int el, auto&& f) {
      const auto p = m.element_points(el);
      const auto q = triangle_rule(p[0], p[1], p[2], 6);
      double a = 0;
      for (std::size_t i = 0; i < q.size(); ++i) a += q.weights[i] * std::pow(f(q.points[i]), 2);
      return a;
    };
    double ext = 0;
    for (int j : nb.members) ext += l2(j, [&](const Vec2& x) { return e(x)[0]; });
    const double own = l2(k, [&](const Vec2& x) { return field_value(s, c, k, x).x(); });
    worst = std::max(worst, std::sqrt(ext / own));
  }
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_LT(worst, 60.0);  // observed 46.5 for P2 on a 12-element patch
}

TEST(Penalty, VanishesOnPolynomials) {
  CircleCase st;
  std::mt19937 rng(12);
  std::normal_distribution<double> nd;
  for (int deg = 1; deg <= 2; ++deg) {
    for (int side = 0; side < 2; ++side) {
      const auto vs = build_space(st.mesh, st.cls.covered(side), Family::lagrange, deg);
      const auto bs = build_space(st.mesh, st.cls.covered(side), Family::bdm, deg);
      const SparseMatrix sv = assemble_penalty(vs, st.cls, deg, side);
      for (int t = 0; t < 10; ++t) {
        std::vector<double> a(12);
        for (auto& v : a) v = nd(rng);
        auto f = [&](const Vec2& x) {
          double r = a[0] + a[1] * x.x() + a[2] * x.y();
          if (deg == 2) r += a[3] * x.x() * x.x() + a[4] * x.x() * x.y() + a[5] * x.y() * x.y();
          return r;
        };
        const Vector c = interpolate(vs, f);
        EXPECT_LE(penalty_energy(vs, st.cls, deg, side, c), 1e-18);
        EXPECT_LE(std::abs(c.dot(sv * c)), 1e-12);
        const Vector cb = interpolate(bs, [&](const Vec2& x) { return Vec2(f(x), a[6] + a[7] * x.y() - f(x)); });
        EXPECT_LE(penalty_energy(bs, st.cls, deg, side, cb), 1e-18);
      }
    }
  }
  const auto vs = build_space(st.mesh, st.cls.covered0, Family::lagrange, 1);
  EXPECT_EQ(penalty_energy(vs, st.cls, 1, 0, Vector::Zero(vs.num_dofs())), 0.0);
}

TEST(Penalty, SymmetricPositiveSemidefinite) {
  CircleCase st;
  for (auto fam : {Family::lagrange, Family::bdm}) {
    for (int side = 0; side < 2; ++side) {
      const auto s = build_space(st.mesh, st.cls.covered(side), fam, 1);
      const SparseMatrix S = assemble_penalty(s, st.cls, 1, side);
      const DenseMatrix d(S);
      EXPECT_EQ((d - d.transpose()).cwiseAbs().maxCoeff(), 0.0);
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(d);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * d.cwiseAbs().maxCoeff());
    }
  }
}

TEST(Penalty, MatchesDirectOracle) {
  CircleCase st;
  const auto s = build_space(st.mesh, st.cls.covered0, Family::lagrange, 1);
  std::mt19937 rng(13);
  std::normal_distribution<double> nd;
  Vector c(s.num_dofs());
  for (int i = 0; i < c.size(); ++i) c[i] = nd(rng);
  const SparseMatrix S = assemble_penalty(s, st.cls, 1, 0);
  double oracle = 0.0;
  for (int k : st.cls.cut) {
    const int a = st.cls.anchor0[k];
    auto fa = [&](const Vec2& x) { return field_value(s, c, a, x).x(); };
    const auto proj = dense_projection(st.mesh.element_points(a), 1, fa);
    const auto p = st.mesh.element_points(k);
    const auto q = triangle_rule(p[0], p[1], p[2], 12);
    for (std::size_t i = 0; i < q.size(); ++i) {
      oracle += q.weights[i] * std::pow(field_value(s, c, k, q.points[i]).x() - proj(q.points[i]), 2);
    }
  }
  EXPECT_NEAR(c.dot(S * c) / oracle, 1.0, 1e-10);
  EXPECT_NEAR(penalty_energy(s, st.cls, 1, 0, c) / oracle, 1.0, 1e-10);
}

TEST(Penalty, ControlsCutOnlyFields) {
  // A field supported only on cut elements has positive penalty energy unless it vanishes there.
  const Mesh m = build_uniform({}, 6);
  const auto cls = classify(m, Interface::circle({0.02, -0.01}, 0.55));
  for (auto fam : {Family::lagrange, Family::bdm}) {
    const auto s = build_space(m, cls.covered0, fam, 1);
    const SparseMatrix S = assemble_penalty(s, cls, 1, 0);
    std::vector<char> interior_dof(s.num_dofs(), 0);
    for (int k : cls.interior0)
      for (int d : s.element_dofs(k)) interior_dof[d] = 1;
    std::vector<int> free;
    for (int i = 0; i < s.num_dofs(); ++i)
      if (!interior_dof[i]) free.push_back(i);
    ASSERT_FALSE(free.empty());
    const DenseMatrix d(S);
    DenseMatrix sub(free.size(), free.size());
    for (std::size_t i = 0; i < free.size(); ++i)
      for (std::size_t j = 0; j < free.size(); ++j) sub(i, j) = d(free[i], free[j]);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(sub);
    EXPECT_GT(es.eigenvalues().minCoeff(), 1e-10 * es.eigenvalues().maxCoeff());
  }
}
