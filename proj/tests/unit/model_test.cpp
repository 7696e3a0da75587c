#include <gtest/gtest.h>

#include <functional>

#include "iecclone/model.hpp"
#include "iecclone/st_parser.hpp"
#include "test_data.hpp"

using namespace iecclone;

namespace {

Project tiny() {
  Project p;
  p.name = "P";
  Pou pou;
  pou.name = "MAIN";
  pou.variables = {{"A", "BOOL", VarSection::Local, std::nullopt},
                   {"B", "INT", VarSection::Input, std::string("3")}};
  pou.body.content = parseStructuredText("IF A THEN B := B + 1; ELSE B := 0; END_IF; A := FALSE;");
  p.pous.push_back(pou);
  return p;
}

}  // namespace

TEST(ArtifactPath, StringRoundTrip) {
  auto path = ArtifactPath::fromString("pous/MAIN/variables/A");
  EXPECT_EQ(path.size(), 2u);
  EXPECT_EQ(path.toString(), "pous/MAIN/variables/A");
  EXPECT_TRUE(ArtifactPath::fromString("").empty());
  EXPECT_TRUE(ArtifactPath::fromString("pous/MAIN").isPrefixOf(path));
  EXPECT_FALSE(path.isPrefixOf(ArtifactPath::fromString("pous/MAIN")));
}

TEST(ArtifactPath, NumericKeysOrderNumerically) {
  EXPECT_LT(compareSegments({"statements", "2"}, {"statements", "10"}), 0);
  EXPECT_GT(compareSegments({"statements", "b"}, {"statements", "a"}), 0);
  EXPECT_LT(compareSegments({"a", "9"}, {"b", "0"}), 0);
  EXPECT_TRUE(ArtifactPath::fromString("x/2") < ArtifactPath::fromString("x/10"));
}

TEST(Model, PathOfAndResolveAgree) {
  Project p = tiny();
  std::size_t visited = 0;
  std::function<void(const ArtifactRef&)> walk = [&](const ArtifactRef& ref) {
    ArtifactPath path = pathOf(p, ref);
    auto back = resolve(p, path);
    ASSERT_TRUE(back.has_value()) << path.toString();
    EXPECT_EQ(*back, ref) << path.toString();
    ++visited;
    for (const auto& c : childEntries(ref)) walk(c.ref);
  };
  walk(ArtifactRef{&p});
  EXPECT_GE(visited, 7u);
}

TEST(Model, ChildEntriesFilterByType) {
  Project p = tiny();
  const Pou& pou = p.pous[0];
  EXPECT_EQ(childEntries(ArtifactRef{&pou}, ArtifactType::Variable).size(), 2u);
  EXPECT_EQ(childrenOf(ArtifactRef{&pou}, ArtifactType::StBody).size(), 1u);
  EXPECT_TRUE(canContain(ArtifactType::Pou, ArtifactType::Variable));
  EXPECT_FALSE(canContain(ArtifactType::Variable, ArtifactType::Pou));
}

TEST(Model, DetachedArtifactThrows) {
  Project p = tiny();
  VariableDecl stray{"Z", "INT", VarSection::Local, std::nullopt};
  EXPECT_THROW(pathOf(p, ArtifactRef{&stray}), ModelError);
}

TEST(Model, StatementCountsIncludeNesting) {
  const auto& body = std::get<StBody>(tiny().pous[0].body.content);
  EXPECT_EQ(body.statements.size(), 2u);
  EXPECT_EQ(totalStatementCount(body), 4u);
  EXPECT_EQ(maxNestingDepth(body), 2u);
}

TEST(Model, InvariantsHoldOnSamples) {
  for (const char* f : {"example.xml", "example_variant.xml", "sfc_nested.xml", "ld_fbd.xml",
                        "clones.xml", "unrelated.xml"}) {
    EXPECT_TRUE(checkInvariants(loadSample(f)).empty()) << f;
  }
}

TEST(Model, InvariantsCatchDuplicateVariables) {
  Project p = tiny();
  p.pous[0].variables.push_back(p.pous[0].variables[0]);
  EXPECT_FALSE(checkInvariants(p).empty());
}

TEST(Model, RootIdentifier) {
  EXPECT_EQ(rootIdentifier("T1.Q"), "T1");
  EXPECT_EQ(rootIdentifier("A"), "A");
  EXPECT_TRUE(isIdentifier("_x1"));
  EXPECT_FALSE(isIdentifier("1x"));
  EXPECT_FALSE(isIdentifier(""));
}

TEST(Model, DescribeVariable) {
  Project p = tiny();
  EXPECT_EQ(describe(ArtifactRef{&p.pous[0].variables[0]}), "Variable A : BOOL");
}

TEST(Model, EnumNamesRoundTrip) {
  for (auto t : {ArtifactType::Project, ArtifactType::Pou, ArtifactType::Statement,
                 ArtifactType::Expression, ArtifactType::Block}) {
    EXPECT_EQ(artifactTypeFromString(toString(t)), t);
  }
  EXPECT_FALSE(artifactTypeFromString("nonsense").has_value());
  for (auto q : {ActionQualifier::N, ActionQualifier::SD, ActionQualifier::Entry}) {
    EXPECT_EQ(actionQualifierFromString(toString(q)), q);
  }
}
