#include "lsfem/mesh.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace lsfem;

namespace {

std::vector<int> brute_force_neighbors(const Mesh& m, int k) {
  std::vector<int> out;
  const auto& a = m.element(k);
  for (int j = 0; j < m.num_elements(); ++j) {
    const auto& b = m.element(j);
    bool share = false;
    for (int u : a)
      for (int v : b) share = share || u == v;
    if (share) out.push_back(j);
  }
  return out;
}

}  // namespace

TEST(Mesh, StructuredCounts) {
  const Mesh m = build_uniform({}, 10);
  EXPECT_EQ(m.num_elements(), 200);
  EXPECT_EQ(m.num_vertices(), 121);
  EXPECT_NEAR(m.h(), 0.2 * std::sqrt(2.0), 1e-15);

  const Mesh unit = build_uniform({0, 1, 0, 1}, 2);
  EXPECT_EQ(unit.num_elements(), 8);
  EXPECT_EQ(unit.num_vertices(), 9);
}

TEST(Mesh, AreasSumToDomain) {
  const Mesh m = build_uniform({}, 40);
  EXPECT_EQ(m.num_elements(), 3200);
  double area = 0.0;
  for (int k = 0; k < m.num_elements(); ++k) {
    EXPECT_GT(m.element_area(k), 0.0);
    area += m.element_area(k);
  }
  EXPECT_NEAR(area, 4.0, 1e-12);
}

TEST(Mesh, EdgeIncidence) {
  const int n = 6;
  const Mesh m = build_uniform({}, n);
  int boundary = 0;
  for (int e = 0; e < m.num_edges(); ++e) {
    const auto& ed = m.edge(e);
    EXPECT_LT(ed.vertices[0], ed.vertices[1]);
    if (ed.on_boundary()) {
      ++boundary;
    } else {
      EXPECT_EQ(ed.elements.size(), 2u);
    }
  }
  EXPECT_EQ(boundary, 4 * n);
  EXPECT_EQ(m.num_edges(), 3 * n * n + 2 * n);
  double hmax = 0.0;
  for (int k = 0; k < m.num_elements(); ++k) hmax = std::max(hmax, m.element_diameter(k));
  EXPECT_EQ(m.h(), hmax);
}

TEST(Mesh, RejectsTooCoarse) {
  EXPECT_THROW(build_uniform({}, 1), ConfigError);
  const Mesh m = build_uniform({}, 2);
  EXPECT_THROW(m.delta_neighborhood(-1), ConfigError);
  EXPECT_THROW(m.delta_neighborhood(8), ConfigError);
}

TEST(Mesh, NeighborhoodMatchesBruteForce) {
  for (int n = 2; n <= 8; ++n) {
    const Mesh m = build_uniform({0, 1, 0, 1}, n);
    for (int k = 0; k < m.num_elements(); ++k) {
      const auto nb = m.delta_neighborhood(k);
      EXPECT_TRUE(nb.contains(k));
      EXPECT_EQ(nb.members, brute_force_neighbors(m, k));
    }
  }
  const Mesh unit = build_uniform({0, 1, 0, 1}, 2);
  EXPECT_EQ(unit.delta_neighborhood(0).members.size(), brute_force_neighbors(unit, 0).size());
}

TEST(Mesh, NeighborhoodSymmetric) {
  const Mesh m = build_uniform({}, 12);
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pick(0, m.num_elements() - 1);
  for (int t = 0; t < 500; ++t) {
    const int a = pick(rng), b = pick(rng);
    EXPECT_EQ(m.delta_neighborhood(a).contains(b), m.delta_neighborhood(b).contains(a));
  }
}

TEST(Mesh, Barycentric) {
  const Mesh m = build_uniform({}, 3);
  const Vec2 c = m.barycenter(5);
  for (double l : m.barycentric(5, c)) EXPECT_NEAR(l, 1.0 / 3.0, 1e-14);
}
