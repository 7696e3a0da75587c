#include <gtest/gtest.h>

#include <algorithm>

#include "iecclone/compare.hpp"
#include "iecclone/generator.hpp"
#include "test_data.hpp"

using namespace iecclone;

namespace {

const char* kSamples[] = {"example.xml", "example_variant.xml", "sfc_nested.xml",
                          "ld_fbd.xml",  "clones.xml",          "unrelated.xml"};

Metric variablesMetric() {
  return loadMetricFile(std::string(IECCLONE_DATA_DIR) + "/metrics/variables.json");
}

// Recomputes a pair's similarity from raw attribute evaluations and the
// selected child pairs: weighted mean over attributes and non-empty options,
// option = selected sum / larger side.
double recompute(const ArtifactPairNode& node, const ArtifactRef& l, const ArtifactRef& r) {
  double num = 0.0, den = 0.0;
  for (const auto& a : node.attributes) {
    num += a.weight * evalAttribute(a.attribute, l, r);
    den += a.weight;
  }
  for (const auto& o : node.options) {
    const std::size_t larger = std::max(o.leftItems.size(), o.rightItems.size());
    if (larger == 0) continue;
    double sum = 0.0;
    for (const auto& p : o.pairs) {
      if (!p.selected) continue;
      sum += recompute(p, o.leftItems[p.leftIndex].ref, o.rightItems[p.rightIndex].ref);
    }
    num += o.weight * (sum / static_cast<double>(larger));
    den += o.weight;
  }
  return den > 0.0 ? num / den : 1.0;
}

const OptionNode* findOption(const ArtifactPairNode& node, ArtifactType type) {
  for (const auto& o : node.options) {
    if (o.type == type) return &o;
  }
  return nullptr;
}

}  // namespace

TEST(Compare, WorkedExampleVariablePairs) {
  Project p = loadSample("example.xml");
  Metric m = variablesMetric();
  const Pou& pou = p.pous[0];
  CompareOptions opts;
  opts.retainUnmatched = true;
  SimilarityTree t = compare(ArtifactRef{&pou}, ArtifactRef{&pou}, m.root, m, opts);
  const OptionNode* vars = findOption(t.root, ArtifactType::Variable);
  ASSERT_NE(vars, nullptr);
  ASSERT_EQ(vars->pairs.size(), 4u);
  std::vector<double> sims;
  for (const auto& pr : vars->pairs) sims.push_back(pr.similarity);
  EXPECT_EQ(sims, (std::vector<double>{1.0, 0.5, 0.5, 1.0}));
  for (const auto& pr : vars->pairs) {
    EXPECT_EQ(pr.selected, pr.leftIndex == pr.rightIndex);
  }
  EXPECT_EQ(vars->similarity, 1.0);
  EXPECT_EQ(t.similarity(), 1.0);
}

TEST(Compare, SelfSimilarityIsOne) {
  for (auto kind : {BuiltinMetric::Coarse, BuiltinMetric::Fine}) {
    Metric m = builtinMetric(kind);
    for (const char* f : kSamples) {
      Project p = loadSample(f);
      EXPECT_NEAR(compareInter(p, p, m).similarity(), 1.0, 1e-9) << f;
    }
  }
}

TEST(Compare, RenameAndInsertLowerSimilarity) {
  Project a = loadSample("example.xml"), b = loadSample("example_variant.xml");
  SimilarityTree t = compareInter(a, b, builtinMetric(BuiltinMetric::Fine));
  EXPECT_LT(t.similarity(), 1.0);
  bool changedAssignment = false;
  walkTree(t, [&](const PairVisit& v) {
    if (typeOf(v.left) == ArtifactType::Statement && v.node.similarity < 1.0) {
      changedAssignment |= describe(v.left).find("B := FALSE") != std::string::npos;
    }
  });
  EXPECT_TRUE(changedAssignment);
}

TEST(Compare, PropagationMatchesRecomputation) {
  Metric m = builtinMetric(BuiltinMetric::Fine);
  std::vector<std::pair<std::string, std::string>> cases{
      {"example.xml", "example_variant.xml"},
      {"sfc_nested.xml", "sfc_nested_changed.xml"},
      {"clones.xml", "unrelated.xml"},
      {"ld_fbd.xml", "sfc_nested.xml"}};
  for (const auto& [l, r] : cases) {
    Project a = loadSample(l), b = loadSample(r);
    SimilarityTree t = compareInter(a, b, m);
    EXPECT_NEAR(t.similarity(), recompute(t.root, t.leftRoot, t.rightRoot), 1e-12) << l << " " << r;
    // propagate() is idempotent on a finished tree.
    ArtifactPairNode copy = t.root;
    propagate(copy, t.weighted);
    EXPECT_NEAR(copy.similarity, t.root.similarity, 1e-12);
  }
}

TEST(Compare, UnweightedIgnoresWeights) {
  Project p = loadSample("example.xml");
  Metric m = variablesMetric();
  m.root.options[0].attributes[0].weight = 0.9;
  m.root.options[0].attributes[1].weight = 0.1;
  const Pou& pou = p.pous[0];
  Project q = loadSample("example_variant.xml");
  const Pou& other = q.pous[0];
  m.weighted = false;
  SimilarityTree t = compare(ArtifactRef{&pou}, ArtifactRef{&other}, m.root, m);
  // B vs VAR1: names differ, types agree -> 0.5 regardless of the weights.
  const OptionNode* vars = findOption(t.root, ArtifactType::Variable);
  ASSERT_NE(vars, nullptr);
  bool sawHalf = false;
  for (const auto& pr : vars->pairs) sawHalf |= pr.selected && pr.similarity == 0.5;
  EXPECT_TRUE(sawHalf);
}

TEST(Compare, NestedActionReachedThroughPointer) {
  Project a = loadSample("sfc_nested.xml");
  SimilarityTree t = compareInter(a, a, builtinMetric(BuiltinMetric::Fine));
  bool statementUnderAction = false;
  walkTree(t, [&](const PairVisit& v) {
    if (typeOf(v.left) != ArtifactType::Statement) return;
    for (const auto& seg : v.leftPath.segments()) statementUnderAction |= seg.role == "actions";
  });
  EXPECT_TRUE(statementUnderAction);
}

TEST(Compare, IntraPairsAndJobs) {
  Project p = loadSample("clones.xml");
  Metric m = builtinMetric(BuiltinMetric::Fine);
  auto one = compareIntra(p, m, {}, 1);
  auto four = compareIntra(p, m, {}, 4);
  const std::size_t n = p.pous.size();
  ASSERT_EQ(one.size(), n * (n - 1) / 2);
  ASSERT_EQ(four.size(), one.size());
  for (std::size_t k = 0; k < one.size(); ++k) {
    EXPECT_EQ(one[k].leftPath, four[k].leftPath);
    EXPECT_EQ(one[k].similarity(), four[k].similarity());
    EXPECT_EQ(similarityTreeJson(one[k]), similarityTreeJson(four[k]));
  }
}

TEST(Compare, PairCountsScaleWithProduct) {
  GeneratorOptions o;
  o.pous = 6;
  Project a = generateProject(o);
  o.seed = 2;
  Project b = generateProject(o);
  PairCounts c = countPairs(compareInter(a, b, builtinMetric(BuiltinMetric::Fine)));
  EXPECT_EQ(c.pairs.at(ArtifactType::Pou), 36u);
  EXPECT_GT(c.totalPairs(), 36u);
  EXPECT_GT(c.attributeEvaluations, 0u);
}

TEST(Compare, RetainedCountsCoverSelected) {
  Project a = loadSample("example.xml"), b = loadSample("example_variant.xml");
  CompareOptions opts;
  opts.retainUnmatched = true;
  SimilarityTree t = compareInter(a, b, builtinMetric(BuiltinMetric::Fine), opts);
  EXPECT_EQ(countRetainedPairs(t.root).totalPairs(), countPairs(t).totalPairs());
}
