#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "pnss/cluster.hpp"
#include "support/oracles.hpp"

using namespace pnss;

namespace {

Matrix random_dissimilarity(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.1, 5.0);
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = u(rng);
  return d;
}

struct SetMerge {
  std::set<std::size_t> a, b;
  double height;
};

std::vector<SetMerge> as_sets(const Dendrogram& tree) {
  const std::size_t n = tree.observations;
  std::vector<std::set<std::size_t>> members(n + tree.merges.size());
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  std::vector<SetMerge> out;
  for (std::size_t s = 0; s < tree.merges.size(); ++s) {
    const Merge& m = tree.merges[s];
    out.push_back({members[m.left], members[m.right], m.height});
    members[n + s] = members[m.left];
    members[n + s].insert(members[m.right].begin(), members[m.right].end());
    EXPECT_EQ(m.size, members[n + s].size());
  }
  return out;
}

// Same clusters formed at the same heights, regardless of merge order.
void expect_same_hierarchy(std::vector<SetMerge> got, std::vector<oracle::LwMerge> want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  auto by_height = [](const auto& x, const auto& y) { return x.height < y.height; };
  std::sort(got.begin(), got.end(), by_height);
  std::sort(want.begin(), want.end(), by_height);
  for (std::size_t s = 0; s < got.size(); ++s) {
    EXPECT_NEAR(got[s].height, want[s].height, tol);
    const bool same = (got[s].a == want[s].a && got[s].b == want[s].b) || (got[s].a == want[s].b && got[s].b == want[s].a);
    EXPECT_TRUE(same) << "merge " << s;
  }
}

}  // namespace

TEST(DistanceMatrix, Validation) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 1) = 1.0;
  EXPECT_THROW(DistanceMatrix::from_dense(m), DomainError);
  m(1, 0) = 1.0;
  EXPECT_NO_THROW(DistanceMatrix::from_dense(m));
  m(2, 2) = 0.5;
  EXPECT_THROW(DistanceMatrix::from_dense(m), DomainError);
  EXPECT_THROW(DistanceMatrix::from_dense(Matrix::Zero(2, 3)), DimensionError);
  DistanceMatrix d(3);
  EXPECT_THROW(d.set(1, 1, 0.0), DomainError);
  EXPECT_THROW(d.set(0, 1, -1.0), DomainError);
  d.set(2, 0, 4.0);
  EXPECT_EQ(d(0, 2), 4.0);
}

TEST(DistanceMatrix, GreatCircleAndEuclidean) {
  std::mt19937_64 rng(81);
  Matrix pts(4, 10);
  for (int j = 0; j < 10; ++j) pts.col(j) = oracle::random_unit(rng, 4);
  const DistanceMatrix g1 = great_circle_distance_matrix(pts, 1), g4 = great_circle_distance_matrix(pts, 4);
  EXPECT_EQ(g1.condensed(), g4.condensed());
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j)
      EXPECT_NEAR(g1(i, j), i == j ? 0.0 : oracle::arc(pts.col(Eigen::Index(i)), pts.col(Eigen::Index(j))), 1e-7);
  const Matrix rows = pts.transpose();
  const DistanceMatrix e = euclidean_distance_matrix(rows);
  EXPECT_NEAR(e(2, 7), (rows.row(2) - rows.row(7)).norm(), 1e-14);
}

TEST(Ward, MatchesBruteForceRecursion) {
  std::mt19937_64 rng(82);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index n = 2 + t % 7;
    const Matrix d = random_dissimilarity(rng, n);
    expect_same_hierarchy(as_sets(ward_linkage(DistanceMatrix::from_dense(d))), oracle::brute_force_ward(d), 1e-10);
  }
}

TEST(Ward, SquaredVariantMatchesBruteForce) {
  std::mt19937_64 rng(83);
  for (int t = 0; t < 50; ++t) {
    const Matrix d = random_dissimilarity(rng, 2 + t % 7);
    expect_same_hierarchy(as_sets(ward_linkage(DistanceMatrix::from_dense(d), WardVariant::WardD2)),
                          oracle::brute_force_ward(d, true), 1e-10);
  }
}

TEST(Ward, HeightsMonotone) {
  std::mt19937_64 rng(84);
  const DistanceMatrix d = DistanceMatrix::from_dense(random_dissimilarity(rng, 40));
  const Dendrogram tree = ward_linkage(d);
  for (std::size_t s = 1; s < tree.merges.size(); ++s) EXPECT_GE(tree.merges[s].height, tree.merges[s - 1].height);
}

TEST(CutTree, ExtremesAndNumbering) {
  std::mt19937_64 rng(85);
  const DistanceMatrix d = DistanceMatrix::from_dense(random_dissimilarity(rng, 12));
  const Dendrogram tree = ward_linkage(d);
  const auto all = cut_tree(tree, 12);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(all[i], static_cast<int>(i + 1));
  for (int l : cut_tree(tree, 1)) EXPECT_EQ(l, 1);
  const auto three = cut_tree(tree, 3);
  EXPECT_EQ(three[0], 1);
  int seen = 0;
  for (int l : three) {
    EXPECT_LE(l, seen + 1);
    seen = std::max(seen, l);
  }
  EXPECT_EQ(seen, 3);
  EXPECT_THROW(cut_tree(tree, 0), RangeError);
  EXPECT_THROW(cut_tree(tree, 13), RangeError);
}

TEST(CutTree, NestedPartitions) {
  std::mt19937_64 rng(86);
  const Dendrogram tree = ward_linkage(DistanceMatrix::from_dense(random_dissimilarity(rng, 25)));
  for (std::size_t k = 1; k < 25; ++k) {
    const auto coarse = cut_tree(tree, k), fine = cut_tree(tree, k + 1);
    // Every fine cluster sits inside one coarse cluster; exactly one coarse cluster splits.
    std::map<int, std::set<int>> parents;
    for (std::size_t i = 0; i < 25; ++i) parents[fine[i]].insert(coarse[i]);
    for (const auto& [f, cs] : parents) EXPECT_EQ(cs.size(), 1u);
    std::map<int, std::set<int>> children;
    for (std::size_t i = 0; i < 25; ++i) children[coarse[i]].insert(fine[i]);
    int splits = 0;
    for (const auto& [c, fs] : children) splits += fs.size() == 2 ? 1 : 0;
    EXPECT_EQ(splits, 1);
  }
}

TEST(Ward, ScaleAndPermutationInvariance) {
  std::mt19937_64 rng(87);
  const Matrix d = random_dissimilarity(rng, 15);
  const auto base = ward_cluster(DistanceMatrix::from_dense(d), 4);
  EXPECT_EQ(ward_cluster(DistanceMatrix::from_dense(3.5 * d), 4), base);

  std::vector<Eigen::Index> perm(15);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix dp(15, 15);
  for (Eigen::Index i = 0; i < 15; ++i)
    for (Eigen::Index j = 0; j < 15; ++j) dp(i, j) = d(perm[i], perm[j]);
  const auto permuted = ward_cluster(DistanceMatrix::from_dense(dp), 4);
  // Same partition up to relabeling.
  for (Eigen::Index i = 0; i < 15; ++i)
    for (Eigen::Index j = 0; j < 15; ++j)
      EXPECT_EQ(permuted[i] == permuted[j], base[perm[i]] == base[perm[j]]);
}

TEST(Ward, SeparatedGroups) {
  std::mt19937_64 rng(88);
  Matrix rows(30, 2);
  for (int i = 0; i < 30; ++i) rows.row(i) = Eigen::RowVector2d(10.0 * (i / 10), 0.0) + 0.1 * oracle::gaussian(rng, 2).transpose();
  const auto labels = ward_cluster(euclidean_distance_matrix(rows), 3);
  for (int i = 0; i < 30; ++i) EXPECT_EQ(labels[i], i / 10 + 1);
}
