#include <gtest/gtest.h>

#include <functional>

#include "iecclone/family.hpp"
#include "test_data.hpp"

using namespace iecclone;

namespace {

FamilyModel modelOf(const char* l, const char* r, double lambda = 1.0) {
  Project a = loadSample(l), b = loadSample(r);
  return buildFamilyModel(compareInter(a, b, builtinMetric(BuiltinMetric::Fine)), lambda);
}

void forEach(const FmNode& n, const std::function<void(const FmNode&, const FmNode*)>& f,
             const FmNode* parent = nullptr) {
  f(n, parent);
  for (const auto& c : n.children) forEach(c, f, &n);
}

}  // namespace

TEST(FamilyModel, SelfComparisonIsAllMandatory) {
  for (const char* s : {"example.xml", "sfc_nested.xml", "ld_fbd.xml", "clones.xml"}) {
    FamilyModel fm = modelOf(s, s);
    forEach(fm.root, [&](const FmNode& n, const FmNode*) {
      EXPECT_EQ(n.category, Category::Mandatory) << s << " " << n.name;
    });
  }
}

TEST(FamilyModel, RenameAndInsert) {
  FamilyModel fm = modelOf("example.xml", "example_variant.xml");
  EXPECT_TRUE(checkFamilyModel(fm).empty());
  std::size_t optional = 0, alternative = 0;
  forEach(fm.root, [&](const FmNode& n, const FmNode*) {
    if (n.category == Category::Optional) {
      ++optional;
      EXPECT_EQ(n.origin, Origin::RightOnly);
      EXPECT_FALSE(n.leftPath.has_value());
    }
    if (n.category == Category::Alternative) {
      ++alternative;
      EXPECT_GT(n.similarity, 0.0);
      EXPECT_LT(n.similarity, 1.0);
    }
  });
  EXPECT_EQ(optional, 2u);  // variable C and assignment C := 7
  EXPECT_GE(alternative, 3u);
}

TEST(FamilyModel, LambdaMovesBoundary) {
  FamilyModel strict = modelOf("example.xml", "example_variant.xml", 1.0);
  FamilyModel loose = modelOf("example.xml", "example_variant.xml", 0.5);
  EXPECT_EQ(strict.root.category, Category::Alternative);
  EXPECT_EQ(loose.root.category, Category::Mandatory);
}

TEST(FamilyModel, InvalidLambda) {
  Project p = loadSample("example.xml");
  auto t = compareInter(p, p, builtinMetric(BuiltinMetric::Fine));
  EXPECT_THROW(buildFamilyModel(t, 0.0), FamilyModelError);
  EXPECT_THROW(buildFamilyModel(t, 1.5), FamilyModelError);
}

TEST(FamilyModel, NestedActionChange) {
  FamilyModel fm = modelOf("sfc_nested.xml", "sfc_nested_changed.xml");
  const FmNode* action = nullptr;
  forEach(fm.root, [&](const FmNode& n, const FmNode*) {
    if (n.type == "action" && n.category == Category::Alternative) action = &n;
  });
  ASSERT_NE(action, nullptr);
  std::size_t flagged = 0, mandatory = 0;
  forEach(*action, [&](const FmNode& n, const FmNode* parent) {
    if (n.type != "statement" || parent == nullptr || parent->type != "stBody") return;
    if (n.category == Category::Alternative) {
      ++flagged;
      EXPECT_NE(n.name.find("Speed := 10"), std::string::npos) << n.name;
    } else {
      EXPECT_EQ(n.category, Category::Mandatory);
      ++mandatory;
    }
  });
  EXPECT_EQ(flagged, 1u);
  EXPECT_EQ(mandatory, 3u);
}

TEST(FamilyReport, JsonRoundTrip) {
  FamilyModel fm = modelOf("sfc_nested.xml", "sfc_nested_changed.xml");
  FamilyModel back = parseFamilyModelJson(emitReport(fm, ReportFormat::Json));
  EXPECT_EQ(emitReport(back, ReportFormat::Json), emitReport(fm, ReportFormat::Json));
  EXPECT_EQ(back.root.children.size(), fm.root.children.size());
}

TEST(FamilyReport, TextAndDot) {
  FamilyModel fm = modelOf("example.xml", "example_variant.xml");
  std::string text = emitReport(fm, ReportFormat::Text);
  EXPECT_NE(text.find("! Variable A : BOOL"), std::string::npos);
  EXPECT_NE(text.find("? Variable C : INT"), std::string::npos);
  EXPECT_NE(text.find("<->"), std::string::npos);
  std::string dot = emitReport(fm, ReportFormat::Dot);
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  EXPECT_EQ(reportFormatFromString("dot"), ReportFormat::Dot);
  EXPECT_FALSE(reportFormatFromString("yaml").has_value());
}

TEST(FamilyReport, InvariantCheckerCatchesBadCategory) {
  FamilyModel fm = modelOf("example.xml", "example_variant.xml");
  fm.root.category = Category::Mandatory;  // similarity < lambda
  EXPECT_FALSE(checkFamilyModel(fm).empty());
}

TEST(Clones, IntraCandidates) {
  Project p = loadSample("clones.xml");
  auto trees = compareIntra(p, builtinMetric(BuiltinMetric::Fine), {});
  auto cands = classifyClones(trees);
  auto labelOf = [&](const std::string& l, const std::string& r) -> std::optional<CloneLabel> {
    for (const auto& c : cands) {
      if (c.leftPou.toString() == "pous/" + l && c.rightPou.toString() == "pous/" + r) return c.label;
    }
    return std::nullopt;
  };
  EXPECT_EQ(labelOf("Conveyor", "ConveyorCopy"), CloneLabel::Identical);
  EXPECT_EQ(labelOf("Conveyor", "ConveyorRenamed"), CloneLabel::RenamedOnly);
  EXPECT_FALSE(labelOf("Conveyor", "Averager").has_value());
  for (const auto& c : cands) EXPECT_GE(c.similarity, kDefaultCloneThreshold);
}

TEST(Clones, UnrelatedPousYieldNothing) {
  Project p = loadSample("unrelated.xml");
  EXPECT_TRUE(classifyClones(compareIntra(p, builtinMetric(BuiltinMetric::Fine), {})).empty());
}
