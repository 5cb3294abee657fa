#include "consim/digraph.hpp"

#include <gtest/gtest.h>

#include <random>

#include "consim/errors.hpp"
#include "consim/matrix.hpp"

using namespace consim;

namespace {

DirectedGraph cycle5() {
  DirectedGraph g(5);
  for (std::size_t i = 0; i < 5; ++i) g.add_edge(i, (i + 1) % 5, 1.0);
  return g;
}

DirectedGraph chain5() {
  DirectedGraph g(5);
  for (std::size_t i = 0; i + 1 < 5; ++i) g.add_edge(i, i + 1, 1.0);
  return g;
}

}  // namespace

TEST(Matrix, RejectsNonFiniteEntries) {
  EXPECT_THROW(Matrix::from_rows({{1.0, std::nan("")}}), NonFinite);
  EXPECT_THROW(Matrix(2, 2, std::numeric_limits<double>::infinity()), NonFinite);
}

TEST(Matrix, RankOfIdentityAndProportionalRows) {
  EXPECT_EQ(rank(Matrix::identity(3)), 3);
  EXPECT_EQ(rank(Matrix::from_rows({{1, 2}, {2, 4}})), 1);
  EXPECT_EQ(rank(Matrix(4, 4, 0.0)), 0);
}

TEST(Matrix, RankHandlesRectangular) {
  EXPECT_EQ(rank(Matrix::from_rows({{1, 0, 2}, {0, 1, 1}})), 2);
  EXPECT_EQ(rank(Matrix::from_rows({{1, 2}, {2, 4}, {3, 6}})), 1);
}

TEST(Laplacian, SingleEdge) {
  DirectedGraph g(2);
  g.add_edge(0, 1, 1.0);  // a_21 = 1
  const Matrix l = laplacian(g);
  EXPECT_TRUE(l.equals(Matrix::from_rows({{0, 0}, {-1, 1}}), 0.0));
}

TEST(Laplacian, EmptyGraphIsZero) {
  const Matrix l = laplacian(DirectedGraph(3));
  EXPECT_TRUE(l.equals(Matrix(3, 3, 0.0), 0.0));
}

TEST(Laplacian, ThreeCycle) {
  DirectedGraph g(3);
  g.add_edge(1, 0, 1.0);  // a_12 = 1
  g.add_edge(2, 1, 1.0);  // a_23 = 1
  g.add_edge(0, 2, 1.0);  // a_31 = 1
  const Matrix l = laplacian(g);
  EXPECT_TRUE(l.equals(Matrix::from_rows({{1, -1, 0}, {0, 1, -1}, {-1, 0, 1}}), 0.0));
  EXPECT_EQ(rank(l), 2);  // row reduction by hand: two independent rows
}

TEST(SpanningTree, ChainCycleIsolated) {
  DirectedGraph chain(3);
  chain.add_edge(0, 1, 1.0);
  chain.add_edge(1, 2, 1.0);
  EXPECT_TRUE(has_spanning_tree(chain));
  EXPECT_FALSE(has_spanning_tree(DirectedGraph(2)));
  EXPECT_TRUE(has_spanning_tree(cycle5()));
}

TEST(Partition, CycleChainAndEmpty) {
  const NodePartition pc = partition_nodes(cycle5());
  EXPECT_EQ(pc.with_neighbors.size(), 5u);
  EXPECT_TRUE(pc.without_neighbors.empty());

  const NodePartition ph = partition_nodes(chain5());
  EXPECT_EQ(ph.with_neighbors, (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(ph.without_neighbors, (std::vector<std::size_t>{0}));

  const NodePartition pe = partition_nodes(DirectedGraph(2));
  EXPECT_TRUE(pe.with_neighbors.empty());
  EXPECT_EQ(pe.without_neighbors.size(), 2u);
}

TEST(BlockRankSchur, MatchesHandComputedCases) {
  EXPECT_EQ(block_rank_schur(Matrix::identity(4), 2), 4);
  // Schur complement 1 - 1 = 0; direct row reduction also gives 2.
  EXPECT_EQ(block_rank_schur(Matrix::from_rows({{1, 0, 1}, {0, 1, 0}, {1, 0, 1}}), 2), 2);
  EXPECT_EQ(block_rank_schur(Matrix::from_rows({{2, 0}, {0, 0}}), 1), 1);
}

TEST(BlockRankSchur, RejectsSingularLeadingBlock) {
  EXPECT_THROW(block_rank_schur(Matrix::from_rows({{0, 1}, {0, 1}}), 1), SingularBlock);
}

TEST(AugmentedLaplacianC1, TwoNodeBidirectional) {
  DirectedGraph g(2);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 0, 1.0);
  const std::vector<std::vector<double>> delta(2, std::vector<double>{-1.0, -1.0});
  const Matrix lb = build_augmented_laplacian_c1(g, delta, 2);
  const Matrix expected = Matrix::from_rows(
      {{1, 0, -1, 0}, {0, 1, 0, -1}, {0, -1, 1, 0}, {-1, 0, 0, 1}});
  EXPECT_TRUE(lb.equals(expected, 0.0));
  EXPECT_EQ(rank(lb), 3);  // one deficiency: rows sum to zero with a spanning tree
}

TEST(AugmentedLaplacianC1, SingleStageDegenerates) {
  DirectedGraph g(2);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 0, 1.0);
  const std::vector<std::vector<double>> delta(2, std::vector<double>{-1.0});
  const Matrix lb = build_augmented_laplacian_c1(g, delta, 1);
  EXPECT_TRUE(lb.equals(Matrix::from_rows({{1, -1}, {-1, 1}}), 0.0));
  EXPECT_EQ(rank(lb), 1);
}

TEST(AugmentedLaplacianC1, RejectsNodeWithoutNeighbors) {
  DirectedGraph g(2);
  g.add_edge(0, 1, 1.0);  // node 0 has no in-edges
  const std::vector<std::vector<double>> delta(2, std::vector<double>{-1.0, -1.0});
  EXPECT_THROW(build_augmented_laplacian_c1(g, delta, 2), ZeroInDegree);
}

TEST(AugmentedLaplacianC2, TwoNodeChain) {
  DirectedGraph g(2);
  g.add_edge(0, 1, 1.0);
  const std::vector<std::vector<double>> delta(2, std::vector<double>{-1.0, -1.0});
  const Matrix lb = build_augmented_laplacian_c2(g, 0, delta, 2);
  EXPECT_TRUE(lb.equals(Matrix::from_rows({{0, 0, 0}, {0, 1, -1}, {-1, 0, 1}}), 0.0));
  EXPECT_EQ(rank(lb), 2);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(lb(0, j), 0.0);
}

TEST(AugmentedLaplacianC2, ThreeNodeChainRank) {
  DirectedGraph g(3);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 2, 1.0);
  const std::vector<std::vector<double>> delta(3, std::vector<double>{-1.0, -1.0});
  const Matrix lb = build_augmented_laplacian_c2(g, 0, delta, 2);
  EXPECT_EQ(lb.rows(), 5u);
  EXPECT_EQ(rank(lb), 4);  // row-reduction oracle: (n-1)*m
}

TEST(AugmentedLaplacianC2, RejectsBadRoot) {
  DirectedGraph g(3);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 2, 1.0);
  const std::vector<std::vector<double>> delta(3, std::vector<double>{-1.0, -1.0});
  EXPECT_THROW(build_augmented_laplacian_c2(g, 1, delta, 2), BadRoot);

  DirectedGraph h(3);
  h.add_edge(0, 2, 1.0);  // nodes 0 and 1 both have no neighbors
  EXPECT_THROW(build_augmented_laplacian_c2(h, 0, delta, 2), BadRoot);
}

namespace {

DirectedGraph random_digraph(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> nd(1, 6);
  const std::size_t n = nd(rng);
  const double levels[4] = {0.0, 0.5, 1.0, 2.0};
  std::uniform_int_distribution<int> ld(0, 3);
  DirectedGraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = levels[ld(rng)];
      if (w > 0.0) g.add_edge(j, i, w);
    }
  return g;
}

}  // namespace

TEST(LaplacianRank, TracksSpanningTreeOver200RandomGraphs) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const DirectedGraph g = random_digraph(rng);
    const int r = rank(laplacian(g));
    const int n = static_cast<int>(g.n());
    if (has_spanning_tree(g)) {
      EXPECT_EQ(r, n - 1) << "trial " << trial;
    } else {
      EXPECT_LE(r, n - 2) << "trial " << trial;
    }
  }
}

TEST(BlockRankSchur, AgreesWithDirectRankOn200RandomMatrices) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_int_distribution<int> entry(-2, 2);
  std::uniform_int_distribution<int> coin(0, 1);
  int done = 0;
  while (done < 200) {
    const int nr = size(rng), nc = size(rng);
    const int ell = std::uniform_int_distribution<int>(1, std::min(nr, nc))(rng);
    Matrix e(nr, nc);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nc; ++j) e(i, j) = entry(rng);
    // occasionally overwrite a trailing row with a combination of earlier rows
    if (nr > 1 && coin(rng)) {
      const int dst = nr - 1, src = std::uniform_int_distribution<int>(0, nr - 2)(rng);
      for (int j = 0; j < nc; ++j) e(dst, j) = 2.0 * e(src, j);
    }
    if (rank(e.block(0, 0, ell, ell)) != ell) continue;
    EXPECT_EQ(block_rank_schur(e, ell), rank(e));
    ++done;
  }
}

namespace {

// Spanning-tree digraph where every node keeps at least one in-edge.
DirectedGraph random_tree_c1(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> wd(0.5, 2.0);
  DirectedGraph g(n);
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    g.add_edge(parent, v, wd(rng));
  }
  g.add_edge(std::uniform_int_distribution<std::size_t>(1, n - 1)(rng), 0, wd(rng));
  return g;
}

// Spanning-tree digraph rooted at node 0 with no in-edges at the root.
DirectedGraph random_tree_c2(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> wd(0.5, 2.0);
  std::uniform_int_distribution<int> extra(0, 3);
  DirectedGraph g(n);
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    g.add_edge(parent, v, wd(rng));
  }
  for (std::size_t v = 1; v < n; ++v) {
    if (extra(rng) == 0) {
      const std::size_t from = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      if (from != v && g.weight(v, from) == 0.0) g.add_edge(from, v, wd(rng));
    }
  }
  return g;
}

std::vector<std::vector<double>> random_delta(std::mt19937_64& rng, std::size_t n,
                                              std::size_t m) {
  std::uniform_real_distribution<double> dd(-3.0, -0.1);
  std::vector<std::vector<double>> delta(n, std::vector<double>(m));
  for (auto& row : delta)
    for (auto& d : row) d = dd(rng);
  return delta;
}

}  // namespace

TEST(AugmentedLaplacian, RandomSpanningTreeGraphsSatisfyRankAndSignClaims) {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 3)(rng);

    const DirectedGraph g1 = random_tree_c1(rng, n);
    ASSERT_TRUE(has_spanning_tree(g1));
    const Matrix lb1 = build_augmented_laplacian_c1(g1, random_delta(rng, n, m), m);
    for (std::size_t i = 0; i < lb1.rows(); ++i) {
      EXPECT_LE(std::abs(lb1.row_sum(i)), 1e-12);
      for (std::size_t j = 0; j < lb1.cols(); ++j)
        if (i != j) EXPECT_LE(lb1(i, j), 0.0);
    }
    EXPECT_EQ(rank(lb1), static_cast<int>(n * m) - 1) << "trial " << trial;

    const DirectedGraph g2 = random_tree_c2(rng, n);
    ASSERT_TRUE(has_spanning_tree(g2));
    const Matrix lb2 = build_augmented_laplacian_c2(g2, 0, random_delta(rng, n, m), m);
    for (std::size_t i = 0; i < lb2.rows(); ++i) {
      EXPECT_LE(std::abs(lb2.row_sum(i)), 1e-12);
      for (std::size_t j = 0; j < lb2.cols(); ++j)
        if (i != j) EXPECT_LE(lb2(i, j), 0.0);
    }
    EXPECT_EQ(rank(lb2), static_cast<int>((n - 1) * m)) << "trial " << trial;
  }
}
