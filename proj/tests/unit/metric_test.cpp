#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "iecclone/metric.hpp"
#include "iecclone/st_parser.hpp"

using namespace iecclone;

namespace {

StBody assignments(std::size_t n) {
  StBody body;
  for (std::size_t k = 0; k < n; ++k) {
    Statement s;
    s.target = "x";
    s.value = Expression::literal(std::to_string(k), "INT");
    body.statements.push_back(s);
  }
  return body;
}

std::string readFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MetricValidationError::Kind validationKind(const std::string& doc) {
  try {
    validateMetric(loadMetric(doc));
  } catch (const MetricValidationError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << doc;
  return MetricValidationError::Kind::Syntax;
}

// Naive multiset intersection: repeatedly remove matching elements.
double naiveOverlap(std::vector<std::string> a, std::vector<std::string> b) {
  if (a.empty() && b.empty()) return 1.0;
  const double denom = static_cast<double>(std::max(a.size(), b.size()));
  std::size_t common = 0;
  for (const auto& x : a) {
    auto it = std::find(b.begin(), b.end(), x);
    if (it != b.end()) {
      ++common;
      b.erase(it);
    }
  }
  return common / denom;
}

}  // namespace

TEST(Metric, StatementCountRatio) {
  StBody a = assignments(93), b = assignments(95);
  const double expected = 93.0 / 95.0;
  EXPECT_DOUBLE_EQ(evalAttribute("st-statement-count", ArtifactRef{&a}, ArtifactRef{&b}), expected);
  EXPECT_DOUBLE_EQ(evalAttribute("st-statement-count", ArtifactRef{&b}, ArtifactRef{&a}), expected);
  EXPECT_NEAR(expected, 0.9789, 1e-4);
}

TEST(Metric, RatioSimilarity) {
  EXPECT_DOUBLE_EQ(ratioSimilarity(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(ratioSimilarity(0, 4), 0.0);
  EXPECT_DOUBLE_EQ(ratioSimilarity(3, 4), 0.75);
}

TEST(Metric, MultisetOverlapMatchesNaive) {
  std::mt19937 rng(3);
  const std::vector<std::string> alphabet{"a", "b", "c", "d"};
  for (int n = 0; n < 500; ++n) {
    std::vector<std::string> a(rng() % 6), b(rng() % 6);
    for (auto& x : a) x = alphabet[rng() % 4];
    for (auto& x : b) x = alphabet[rng() % 4];
    EXPECT_DOUBLE_EQ(multisetOverlap(a, b), naiveOverlap(a, b));
  }
}

TEST(Metric, ExpressionEditDistance) {
  Expression a = parseExpression("x + y");
  EXPECT_EQ(expressionEditDistance(a, a, false), 0u);
  EXPECT_EQ(expressionEditDistance(a, parseExpression("x - y"), false), 1u);
  EXPECT_EQ(expressionEditDistance(a, parseExpression("x + z"), false), 1u);
  EXPECT_EQ(expressionEditDistance(a, parseExpression("x + z"), true), 0u);
  EXPECT_EQ(expressionEditDistance(parseExpression("x + 1"), parseExpression("x + 2"), true), 0u);
  EXPECT_DOUBLE_EQ(expressionSimilarity(a, parseExpression("x - y"), false), 1.0 - 1.0 / 3.0);
}

TEST(Metric, CatalogIsConsistent) {
  const auto& cat = attributeCatalog();
  EXPECT_EQ(cat.size(), 39u);
  std::set<std::string_view> ids;
  for (std::size_t k = 0; k < cat.size(); ++k) {
    EXPECT_TRUE(ids.insert(cat[k].id).second) << cat[k].id;
    EXPECT_EQ(attributeIndex(cat[k].id), k);
  }
  EXPECT_FALSE(attributeIndex("no-such").has_value());
}

TEST(Metric, EvalOnWrongTypeThrows) {
  VariableDecl v{"A", "BOOL", VarSection::Local, std::nullopt};
  StBody b;
  EXPECT_THROW(evalAttribute("st-statement-count", ArtifactRef{&v}, ArtifactRef{&b}),
               MetricValidationError);
}

TEST(Metric, BuiltinsValidate) {
  for (auto kind : {BuiltinMetric::Coarse, BuiltinMetric::Fine}) {
    Metric m = builtinMetric(kind);
    EXPECT_NO_THROW(validateMetric(m));
    EXPECT_EQ(loadMetric(saveMetric(m)), m);
  }
  EXPECT_EQ(builtinMetricFromString("fine"), BuiltinMetric::Fine);
  EXPECT_FALSE(builtinMetricFromString("medium").has_value());
}

TEST(Metric, CoarseHasNoStatementOption) {
  Metric m = builtinMetric(BuiltinMetric::Coarse);
  bool count = false, statementOption = false;
  std::function<void(const MetricOption&)> walk = [&](const MetricOption& o) {
    statementOption |= o.type == ArtifactType::Statement;
    for (const auto& a : o.attributes) count |= a.id == "st-statement-count";
    for (const auto& c : o.options) walk(m.resolve(c));
  };
  walk(m.root);
  for (const auto& [name, sub] : m.subMetrics) walk(sub);
  EXPECT_TRUE(count);
  EXPECT_FALSE(statementOption);
}

TEST(Metric, VariablesOnlyMetricFile) {
  Metric m = loadMetricFile(std::string(IECCLONE_DATA_DIR) + "/metrics/variables.json");
  EXPECT_EQ(m.root.type, ArtifactType::Pou);
  ASSERT_EQ(m.root.options.size(), 1u);
  EXPECT_EQ(m.root.options[0].type, ArtifactType::Variable);
  ASSERT_EQ(m.root.options[0].attributes.size(), 2u);
  EXPECT_DOUBLE_EQ(m.root.options[0].attributes[0].weight, 0.5);
  EXPECT_FALSE(readFile(std::string(IECCLONE_DATA_DIR) + "/metrics/variables.json").empty());
}

TEST(MetricValidation, ErrorKinds) {
  using K = MetricValidationError::Kind;
  EXPECT_EQ(validationKind("{ not json"), K::Syntax);
  EXPECT_EQ(validationKind(R"({"name":"m","root":{"type":"gizmo"}})"), K::UnknownType);
  EXPECT_EQ(validationKind(
                R"({"name":"m","root":{"type":"pou","attributes":[{"id":"nope","weight":1}]}})"),
            K::UnknownAttribute);
  EXPECT_EQ(validationKind(
                R"({"name":"m","root":{"type":"pou","attributes":[{"id":"pou-name","weight":2}]}})"),
            K::WeightOutOfRange);
  EXPECT_EQ(validationKind(
                R"({"name":"m","root":{"type":"pou","attributes":[{"id":"var-name","weight":1}]}})"),
            K::TypeMismatch);
  EXPECT_EQ(validationKind(
                R"({"name":"m","root":{"type":"pou","options":[{"type":"stBody","nestedRef":"gone"}]}})"),
            K::DanglingReference);
  EXPECT_EQ(validationKind(
                R"({"name":"m","root":{"type":"pou","attributes":[{"id":"pou-name","weight":0}]}})"),
            K::ZeroWeightSum);
}

TEST(MetricValidation, LocatorNamesNode) {
  try {
    validateMetric(loadMetric(
        R"({"name":"m","root":{"type":"pou","options":[{"type":"variable","attributes":[{"id":"var-name","weight":1},{"id":"bogus","weight":1}]}]}})"));
    FAIL();
  } catch (const MetricValidationError& e) {
    EXPECT_EQ(e.node(), "root/options[0]/attributes[1]");
  }
}
