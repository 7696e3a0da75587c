#include <gtest/gtest.h>

#include <random>

#include "iecclone/generator.hpp"
#include "iecclone/st_parser.hpp"

using namespace iecclone;

namespace {

Expression v(const char* name) { return Expression::varRef(name); }
Expression i(const char* value) { return Expression::literal(value, "INT"); }
Expression bin(BinaryOperator op, Expression a, Expression b) {
  return Expression::binary(op, std::move(a), std::move(b));
}

// Random expression over a fixed vocabulary, independent of the generator.
// The parser folds a minus sign into a numeric literal, so negation is only
// applied to non-numeric operands and negative literals are drawn directly.
Expression randomExpression(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  const int roll = depth == 0 ? pick(rng) % 3 : pick(rng);
  static const BinaryOperator ops[] = {
      BinaryOperator::And, BinaryOperator::Or,  BinaryOperator::Xor, BinaryOperator::Eq,
      BinaryOperator::Ne,  BinaryOperator::Lt,  BinaryOperator::Le,  BinaryOperator::Gt,
      BinaryOperator::Ge,  BinaryOperator::Add, BinaryOperator::Sub, BinaryOperator::Mul,
      BinaryOperator::Div, BinaryOperator::Mod, BinaryOperator::Pow};
  switch (roll) {
    case 0: return v(rng() % 2 ? "x" : "Flag");
    case 1: return Expression::literal(std::to_string(static_cast<int>(rng() % 50) - 10), "INT");
    case 2: return Expression::literal(rng() % 2 ? "TRUE" : "FALSE", "BOOL");
    case 3: return Expression::unary(UnaryOperator::Not, randomExpression(rng, depth - 1));
    case 4: {
      Expression x = randomExpression(rng, depth - 1);
      if (x.kind == Expression::Kind::Literal && x.literalType == "INT") x = v("x");
      return Expression::unary(UnaryOperator::Neg, std::move(x));
    }
    case 5:
      return Expression::call("MAX", {randomExpression(rng, depth - 1),
                                      randomExpression(rng, depth - 1)});
    default:
      return bin(ops[rng() % 15], randomExpression(rng, depth - 1),
                 randomExpression(rng, depth - 1));
  }
}

}  // namespace

TEST(StParser, IfWithAssignment) {
  StBody body = parseStructuredText("IF A THEN\n  B := FALSE;\nEND_IF");
  ASSERT_EQ(body.statements.size(), 1u);
  const Statement& s = body.statements[0];
  EXPECT_EQ(s.kind, StatementKind::If);
  EXPECT_EQ(*s.condition, v("A"));
  ASSERT_EQ(s.children.size(), 1u);
  EXPECT_EQ(s.children[0].target, "B");
  EXPECT_EQ(*s.children[0].value, Expression::literal("FALSE", "BOOL"));
}

TEST(StParser, MultiplicationBindsTighterThanAddition) {
  EXPECT_EQ(parseExpression("a + b * c"),
            bin(BinaryOperator::Add, v("a"), bin(BinaryOperator::Mul, v("b"), v("c"))));
  EXPECT_EQ(parseExpression("a - b - c"),
            bin(BinaryOperator::Sub, bin(BinaryOperator::Sub, v("a"), v("b")), v("c")));
}

TEST(StParser, BooleanPrecedence) {
  // AND over XOR over OR.
  EXPECT_EQ(parseExpression("a OR b AND c"),
            bin(BinaryOperator::Or, v("a"), bin(BinaryOperator::And, v("b"), v("c"))));
  EXPECT_EQ(parseExpression("a XOR b OR c"),
            bin(BinaryOperator::Or, bin(BinaryOperator::Xor, v("a"), v("b")), v("c")));
  EXPECT_EQ(parseExpression("a & b"), bin(BinaryOperator::And, v("a"), v("b")));
}

TEST(StParser, ComparisonBelowArithmetic) {
  EXPECT_EQ(parseExpression("x + 1 > 3 AND y = 2"),
            bin(BinaryOperator::And,
                bin(BinaryOperator::Gt, bin(BinaryOperator::Add, v("x"), i("1")), i("3")),
                bin(BinaryOperator::Eq, v("y"), i("2"))));
  EXPECT_EQ(parseExpression("a < b = c"),
            bin(BinaryOperator::Eq, bin(BinaryOperator::Lt, v("a"), v("b")), v("c")));
}

TEST(StParser, UnaryAndParentheses) {
  EXPECT_EQ(parseExpression("NOT a AND b"),
            bin(BinaryOperator::And, Expression::unary(UnaryOperator::Not, v("a")), v("b")));
  EXPECT_EQ(parseExpression("(a + b) * c"),
            bin(BinaryOperator::Mul, bin(BinaryOperator::Add, v("a"), v("b")), v("c")));
}

TEST(StParser, TypedLiterals) {
  EXPECT_EQ(parseExpression("T#5s").literalType, "TIME");
  EXPECT_EQ(parseExpression("2.5"), Expression::literal("2.5", "REAL"));
  EXPECT_EQ(parseExpression("'abc'"), Expression::literal("'abc'", "STRING"));
}

TEST(StParser, CommentsAndLayoutAreIgnored) {
  StBody a = parseStructuredText("IF A THEN B := FALSE; END_IF;");
  StBody b = parseStructuredText(
      "(* header *)\nIF   A // test\n THEN\n\t B:=FALSE; { pragma }\nEND_IF");
  EXPECT_EQ(a, b);
}

TEST(StParser, ElsifBecomesNestedIf) {
  StBody body = parseStructuredText(
      "IF a THEN x := 1; ELSIF b THEN x := 2; ELSE x := 3; END_IF;");
  ASSERT_EQ(body.statements.size(), 1u);
  const Statement& outer = body.statements[0];
  ASSERT_EQ(outer.elseChildren.size(), 1u);
  const Statement& inner = outer.elseChildren[0];
  EXPECT_EQ(inner.kind, StatementKind::If);
  EXPECT_EQ(*inner.condition, v("b"));
  EXPECT_EQ(inner.elseChildren.size(), 1u);
}

TEST(StParser, CaseForWhileCall) {
  StBody body = parseStructuredText(
      "CASE s OF 1, 2: x := 1; 3: x := 2; ELSE x := 0; END_CASE;"
      "FOR k := 1 TO 10 BY 2 DO x := x + k; END_FOR;"
      "WHILE x > 0 DO x := x - 1; END_WHILE;"
      "T1(IN := go, PT := T#1s, Q => done);");
  ASSERT_EQ(body.statements.size(), 4u);
  const Statement& c = body.statements[0];
  EXPECT_EQ(c.kind, StatementKind::Case);
  ASSERT_EQ(c.caseBranches.size(), 2u);
  EXPECT_EQ(c.caseBranches[0].labels, (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(c.elseChildren.size(), 1u);
  EXPECT_EQ(body.statements[1].kind, StatementKind::For);
  ASSERT_TRUE(body.statements[1].by.has_value());
  EXPECT_EQ(body.statements[2].kind, StatementKind::While);
  const Statement& call = body.statements[3];
  EXPECT_EQ(call.kind, StatementKind::Call);
  EXPECT_EQ(call.callee, "T1");
  ASSERT_EQ(call.args.size(), 3u);
  EXPECT_TRUE(call.args[2].output);
}

TEST(StParser, SyntaxErrorHasPosition) {
  try {
    parseStructuredText("x := 1;\ny := ;");
    FAIL() << "no error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_GT(e.column(), 0);
  }
}

TEST(StParser, UnsupportedConstruct) {
  try {
    parseStructuredText("REPEAT x := x + 1; UNTIL x > 3 END_REPEAT;");
    FAIL() << "no error";
  } catch (const UnsupportedConstructError& e) {
    EXPECT_EQ(e.construct(), "REPEAT");
  }
}

TEST(StPrinter, RandomExpressionsRoundTrip) {
  std::mt19937 rng(7);
  for (int n = 0; n < 2000; ++n) {
    Expression e = randomExpression(rng, 4);
    std::string text = printExpression(e);
    EXPECT_EQ(parseExpression(text), e) << text;
  }
}

TEST(StPrinter, GeneratedBodiesRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorOptions o;
    o.pous = 2;
    o.mixLanguages = false;
    o.maxNesting = 3;
    o.seed = seed;
    for (const auto& pou : generateProject(o).pous) {
      const auto& body = std::get<StBody>(pou.body.content);
      EXPECT_EQ(parseStructuredText(printStructuredText(body)), body);
    }
  }
}
