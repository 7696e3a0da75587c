#include <gtest/gtest.h>

#include <cmath>

#include "iecclone/bench.hpp"

using namespace iecclone;

namespace {

double naivePearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace

TEST(Bench, PearsonMatchesTextbookFormula) {
  std::vector<double> x{1, 2, 3, 4, 5, 7}, y{2.1, 3.9, 6.2, 8.1, 9.7, 15.0};
  EXPECT_NEAR(pearson(x, y), naivePearson(x, y), 1e-12);
  EXPECT_NEAR(pearson(x, {6, 5, 4, 3, 2, 0}), -1.0, 1e-12);
  EXPECT_EQ(pearson({1}, {2}), 0.0);
  EXPECT_EQ(pearson({1, 1, 1}, {1, 2, 3}), 0.0);
}

TEST(Bench, PairsGrowQuadraticallyWithPous) {
  GeneratorOptions base;
  base.statementsPerPou = 4;
  BenchResult r = runGeneratedBench({2, 4, 8}, base, builtinMetric(BuiltinMetric::Fine), 1);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].counts.pairs.at(ArtifactType::Pou), 4u);
  EXPECT_EQ(r.rows[2].counts.pairs.at(ArtifactType::Pou), 64u);
  EXPECT_LT(r.rows[0].pairs, r.rows[1].pairs);
  EXPECT_LT(r.rows[1].pairs, r.rows[2].pairs);
  for (const auto& row : r.rows) EXPECT_EQ(row.pairs, row.counts.totalPairs());
}

TEST(Bench, ReportsWithoutTimingAreStable) {
  GeneratorOptions base;
  base.statementsPerPou = 3;
  auto m = builtinMetric(BuiltinMetric::Coarse);
  BenchResult a = runGeneratedBench({2, 3}, base, m, 1), b = runGeneratedBench({2, 3}, base, m, 2);
  EXPECT_EQ(benchReportJson(a, false), benchReportJson(b, false));
  EXPECT_EQ(benchReportText(a, false), benchReportText(b, false));
}

TEST(Generator, DeterministicAndValid) {
  GeneratorOptions o;
  o.pous = 8;
  Project a = generateProject(o), b = generateProject(o);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(checkInvariants(a).empty());
  EXPECT_EQ(a.pous.size(), 8u);
  o.seed = 9;
  EXPECT_NE(generateProject(o), a);
}
