#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "iecclone/matching.hpp"

using namespace iecclone;

namespace {

using Matrix = std::vector<std::vector<double>>;

std::vector<IndexedEdge> edgesOf(const Matrix& w) {
  std::vector<IndexedEdge> e;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < w[i].size(); ++j) e.push_back({i, j, w[i][j]});
  }
  return e;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

// Exhaustive optimum over all injections of the smaller side.
double bruteForceOptimum(const Matrix& w) {
  const std::size_t rows = w.size(), cols = w.empty() ? 0 : w[0].size();
  const bool transpose = rows > cols;
  const std::size_t small = transpose ? cols : rows, large = transpose ? rows : cols;
  std::vector<std::size_t> perm = iota(large);
  double best = 0.0;
  do {
    double total = 0.0;
    for (std::size_t k = 0; k < small; ++k) {
      total += transpose ? w[perm[k]][k] : w[k][perm[k]];
    }
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Matrix randomMatrix(std::mt19937& rng, std::size_t rows, std::size_t cols) {
  std::uniform_int_distribution<int> grid(0, 20);
  Matrix w(rows, std::vector<double>(cols));
  for (auto& row : w) {
    for (auto& x : row) x = grid(rng) / 20.0;  // coarse grid to force ties
  }
  return w;
}

}  // namespace

TEST(Matching, WorkedExample) {
  Matrix w{{1.0, 0.5}, {0.5, 1.0}};
  auto sel = greedySelect(edgesOf(w), iota(2), iota(2));
  ASSERT_EQ(sel.size(), 2u);
  EXPECT_EQ(sel[0], (IndexedEdge{0, 0, 1.0}));
  EXPECT_EQ(sel[1], (IndexedEdge{1, 1, 1.0}));
}

TEST(Matching, PathKeyedWorkedExample) {
  auto p = [](const char* s) { return ArtifactPath::fromString(s); };
  std::vector<MatchEdge> edges{{p("variables/A"), p("variables/A"), 1.0},
                               {p("variables/A"), p("variables/B"), 0.5},
                               {p("variables/B"), p("variables/A"), 0.5},
                               {p("variables/B"), p("variables/B"), 1.0}};
  MatchResult r = greedyMatch(edges);
  ASSERT_EQ(r.selected.size(), 2u);
  EXPECT_EQ(r.selected[0], edges[0]);
  EXPECT_EQ(r.selected[1], edges[3]);
  EXPECT_TRUE(r.unmatchedLeft.empty());
  EXPECT_TRUE(r.unmatchedRight.empty());
}

TEST(Matching, ZeroEdgesNeverSelected) {
  Matrix w{{0.0, 0.0}, {0.0, 0.3}};
  auto sel = greedySelect(edgesOf(w), iota(2), iota(2));
  ASSERT_EQ(sel.size(), 1u);
  EXPECT_EQ(sel[0], (IndexedEdge{1, 1, 0.3}));
}

TEST(Matching, TiesFollowRanks) {
  Matrix w{{0.5, 0.5}, {0.5, 0.5}};
  auto sel = greedySelect(edgesOf(w), {1, 0}, {0, 1});
  ASSERT_EQ(sel.size(), 2u);
  EXPECT_EQ(sel[0].left, 1u);
  EXPECT_EQ(sel[0].right, 0u);
}

TEST(Matching, RandomMatricesAgainstBruteForce) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 1500; ++trial) {
    const std::size_t rows = 1 + rng() % 6, cols = 1 + rng() % 6;
    Matrix w = randomMatrix(rng, rows, cols);
    auto sel = greedySelect(edgesOf(w), iota(rows), iota(cols));
    std::set<std::size_t> usedL, usedR;
    double total = 0.0;
    for (const auto& e : sel) {
      ASSERT_TRUE(usedL.insert(e.left).second);
      ASSERT_TRUE(usedR.insert(e.right).second);
      ASSERT_GT(e.similarity, 0.0);
      ASSERT_EQ(e.similarity, w[e.left][e.right]);
      total += e.similarity;
    }
    // Maximal: every positive edge touches a used endpoint.
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        if (w[i][j] > 0.0) {
          ASSERT_TRUE(usedL.count(i) || usedR.count(j));
        }
      }
    }
    ASSERT_GE(total + 1e-12, 0.5 * bruteForceOptimum(w));
  }
}

TEST(Matching, IdentityStructuredIsOptimal) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> low(0.0, 0.49);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    Matrix w(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) w[i][j] = i == j ? 1.0 : low(rng);
    }
    auto sel = greedySelect(edgesOf(w), iota(n), iota(n));
    double total = 0.0;
    for (const auto& e : sel) total += e.similarity;
    EXPECT_DOUBLE_EQ(total, bruteForceOptimum(w));
    EXPECT_DOUBLE_EQ(total, static_cast<double>(n));
  }
}
