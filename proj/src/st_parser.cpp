#include "iecclone/st_parser.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace iecclone {

namespace {

std::string positionPrefix(int line, int column) {
  if (line <= 0) return {};
  return "line " + std::to_string(line) + ", column " + std::to_string(column) +
         ": ";
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

enum class Tok {
  Ident,
  Integer,
  Real,
  String,
  TypedLiteral,  // T#5s, INT#5, ...; text is the canonical literal
  Assign,        // :=
  OutAssign,     // =>
  Colon,
  Semicolon,
  Comma,
  Dot,
  Range,  // ..
  LParen,
  RParen,
  LBracket,
  RBracket,
  Op,  // operator symbol, text holds it
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::string literalType;  // for TypedLiteral
  int line = 1;
  int column = 1;
};

const std::unordered_set<std::string> kTimePrefixes = {
    "T", "TIME", "LT", "LTIME", "D", "DATE", "TOD", "TIME_OF_DAY", "DT",
    "DATE_AND_TIME", "LTOD", "LDT", "LDATE", "LTIME_OF_DAY", "LDATE_AND_TIME"};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skipTrivia();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        lexWord(t);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lexNumber(t);
      } else if (c == '\'' || c == '"') {
        lexString(t);
      } else {
        lexSymbol(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& msg, int line, int col) const {
    throw ParseError(msg, line, col);
  }

  void skipTrivia() {
    while (pos_ < src_.size()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '(' && peek(1) == '*') {
        skipBlock("*)", "(*");
      } else if (c == '/' && peek(1) == '*') {
        skipBlock("*/", "/*");
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == '{') {
        skipBlock("}", "{");
      } else {
        return;
      }
    }
  }

  void skipBlock(std::string_view close, std::string_view open) {
    int line = line_, col = col_;
    advance(open.size());
    while (pos_ < src_.size()) {
      if (src_.substr(pos_, close.size()) == close) {
        advance(close.size());
        return;
      }
      advance();
    }
    fail("unterminated comment or pragma", line, col);
  }

  std::string readWhile(auto pred) {
    std::size_t start = pos_;
    while (pos_ < src_.size() && pred(src_[pos_])) advance();
    return std::string(src_.substr(start, pos_ - start));
  }

  static bool isWordChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  void lexWord(Token& t) {
    std::string word = readWhile(isWordChar);
    if (peek() != '#') {
      t.kind = Tok::Ident;
      t.text = std::move(word);
      return;
    }
    advance();  // '#'
    std::string prefix = upper(word);
    t.kind = Tok::TypedLiteral;
    if (kTimePrefixes.count(prefix)) {
      std::string body = readWhile([](char c) {
        return isWordChar(c) || c == '.' || c == ':' || c == '-';
      });
      if (body.empty()) fail("empty " + prefix + " literal", t.line, t.column);
      if (prefix == "T" || prefix == "TIME") {
        t.literalType = "TIME";
        prefix = "T";
      } else if (prefix == "LT" || prefix == "LTIME") {
        t.literalType = "LTIME";
        prefix = "LTIME";
      } else if (prefix == "D" || prefix == "DATE") {
        t.literalType = prefix = "D";
      } else if (prefix == "TOD" || prefix == "TIME_OF_DAY") {
        t.literalType = prefix = "TOD";
      } else if (prefix == "DT" || prefix == "DATE_AND_TIME") {
        t.literalType = prefix = "DT";
      } else {
        t.literalType = prefix;
      }
      t.text = prefix + "#" + upper(body);
      return;
    }
    // Typed literal such as INT#5, BOOL#TRUE, REAL#-1.5, or an enum value
    // like COLOR#RED.
    std::string body;
    if (peek() == '-' || peek() == '+') {
      body += peek();
      advance();
    }
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      Token num;
      lexNumber(num);
      body += num.text;
    } else if (peek() == '\'' || peek() == '"') {
      Token s;
      lexString(s);
      body += s.text;
    } else {
      body += readWhile(isWordChar);
    }
    if (body.empty() || body == "-" || body == "+") {
      fail("malformed typed literal '" + word + "#'", t.line, t.column);
    }
    t.literalType = prefix;
    if (prefix == "BOOL") body = upper(body);
    t.text = body;
  }

  void lexNumber(Token& t) {
    std::string digits = readWhile([](char c) {
      return std::isdigit(static_cast<unsigned char>(c)) || c == '_';
    });
    if (peek() == '#') {
      // based integer: 16#FF, 2#1010, 8#17
      advance();
      std::string body = readWhile([](char c) {
        return std::isxdigit(static_cast<unsigned char>(c)) || c == '_';
      });
      if (body.empty()) fail("malformed based integer", t.line, t.column);
      t.kind = Tok::Integer;
      t.text = digits + "#" + upper(body);
      return;
    }
    std::string text = digits;
    bool real = false;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      real = true;
      advance();
      text += "." + readWhile([](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) || c == '_';
      });
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '+' || peek(1) == '-') &&
          std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      real = true;
      text += 'E';
      advance();
      if (peek() == '+' || peek() == '-') {
        text += peek();
        advance();
      }
      text += readWhile([](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
    }
    text.erase(std::remove(text.begin(), text.end(), '_'), text.end());
    t.kind = real ? Tok::Real : Tok::Integer;
    t.text = std::move(text);
  }

  void lexString(Token& t) {
    char quote = peek();
    std::size_t start = pos_;
    advance();
    while (true) {
      if (pos_ >= src_.size()) fail("unterminated string literal", t.line, t.column);
      char c = peek();
      if (c == '$') {
        advance(2);
        continue;
      }
      advance();
      if (c == quote) break;
    }
    t.kind = Tok::String;
    t.text = std::string(src_.substr(start, pos_ - start));
    t.literalType = quote == '"' ? "WSTRING" : "STRING";
  }

  void lexSymbol(Token& t) {
    auto two = src_.substr(pos_, 2);
    auto set = [&](Tok k, std::size_t n) {
      t.kind = k;
      t.text = std::string(src_.substr(pos_, n));
      advance(n);
    };
    if (two == ":=") return set(Tok::Assign, 2);
    if (two == "=>") return set(Tok::OutAssign, 2);
    if (two == "..") return set(Tok::Range, 2);
    if (two == "<=" || two == ">=" || two == "<>" || two == "**") return set(Tok::Op, 2);
    switch (peek()) {
      case ':': return set(Tok::Colon, 1);
      case ';': return set(Tok::Semicolon, 1);
      case ',': return set(Tok::Comma, 1);
      case '.': return set(Tok::Dot, 1);
      case '(': return set(Tok::LParen, 1);
      case ')': return set(Tok::RParen, 1);
      case '[': return set(Tok::LBracket, 1);
      case ']': return set(Tok::RBracket, 1);
      case '+': case '-': case '*': case '/': case '<': case '>': case '=':
      case '&':
        return set(Tok::Op, 1);
      default:
        break;
    }
    fail(std::string("unexpected character '") + peek() + "'", t.line, t.column);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::unordered_set<std::string> kReserved = {
    "IF",    "THEN",   "ELSIF",     "ELSE",  "END_IF",   "CASE",   "OF",
    "END_CASE", "FOR", "TO",        "BY",    "DO",       "END_FOR", "WHILE",
    "END_WHILE", "REPEAT", "UNTIL", "END_REPEAT", "RETURN", "EXIT", "CONTINUE",
    "AND",   "OR",     "XOR",       "NOT",   "MOD",      "TRUE",   "FALSE",
};

const std::unordered_set<std::string> kUnsupported = {"REPEAT", "RETURN", "EXIT",
                                                      "CONTINUE", "JMP"};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  StBody statementsToEnd() {
    StBody body;
    body.statements = statementList({});
    if (cur().kind != Tok::End) failHere("unexpected '" + cur().text + "'");
    return body;
  }

  Expression expressionToEnd() {
    Expression e = expression();
    if (cur().kind != Tok::End) failHere("unexpected '" + cur().text + "' after expression");
    return e;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& at(std::size_t ahead) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  void next() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }

  [[noreturn]] void failHere(const std::string& msg) const {
    throw ParseError(msg, cur().line, cur().column);
  }

  bool isKeyword(const Token& t, std::string_view kw) const {
    return t.kind == Tok::Ident && t.text.size() == kw.size() && upper(t.text) == kw;
  }
  bool atKeyword(std::string_view kw) const { return isKeyword(cur(), kw); }

  void expectKeyword(std::string_view kw) {
    if (!atKeyword(kw)) failHere("expected " + std::string(kw));
    next();
  }

  void expect(Tok kind, const char* what) {
    if (cur().kind != kind) {
      failHere(std::string("expected ") + what +
               (cur().kind == Tok::End ? " at end of input" : ", found '" + cur().text + "'"));
    }
    next();
  }

  void skipSemicolons() {
    while (cur().kind == Tok::Semicolon) next();
  }

  bool atAny(const std::vector<std::string_view>& terminators) const {
    return std::any_of(terminators.begin(), terminators.end(),
                       [&](std::string_view kw) { return atKeyword(kw); });
  }

  std::vector<Statement> statementList(const std::vector<std::string_view>& terminators,
                                       bool stopAtCaseLabel = false) {
    std::vector<Statement> out;
    while (true) {
      skipSemicolons();
      if (cur().kind == Tok::End || atAny(terminators)) break;
      if (stopAtCaseLabel && looksLikeCaseLabel()) break;
      out.push_back(statement());
    }
    return out;
  }

  Statement statement() {
    const Token& t = cur();
    if (t.kind != Tok::Ident) failHere("expected a statement, found '" + t.text + "'");
    std::string kw = upper(t.text);
    if (kUnsupported.count(kw)) {
      throw UnsupportedConstructError(kw, t.line, t.column);
    }
    if (kw == "IF") return ifStatement();
    if (kw == "CASE") return caseStatement();
    if (kw == "FOR") return forStatement();
    if (kw == "WHILE") return whileStatement();
    if (kReserved.count(kw)) failHere("unexpected keyword " + kw);

    std::string name = reference();
    Statement s;
    if (cur().kind == Tok::Assign) {
      next();
      s.kind = StatementKind::Assignment;
      s.target = std::move(name);
      s.value = expression();
    } else if (cur().kind == Tok::LParen) {
      next();
      s.kind = StatementKind::Call;
      s.callee = std::move(name);
      s.args = callArguments();
    } else {
      failHere("expected ':=' or '(' after '" + name + "'");
    }
    expect(Tok::Semicolon, "';'");
    return s;
  }

  Statement ifStatement() {
    next();  // IF
    Statement s;
    s.kind = StatementKind::If;
    s.condition = expression();
    expectKeyword("THEN");
    s.children = statementList({"ELSIF", "ELSE", "END_IF"});
    if (atKeyword("ELSIF")) {
      // ELSIF chains become an IF nested in the else branch; the nested IF
      // shares this statement's END_IF.
      s.elseChildren.push_back(ifStatementTail());
      return s;
    }
    if (atKeyword("ELSE")) {
      next();
      s.elseChildren = statementList({"END_IF"});
    }
    expectKeyword("END_IF");
    return s;
  }

  Statement ifStatementTail() {
    next();  // ELSIF
    Statement s;
    s.kind = StatementKind::If;
    s.condition = expression();
    expectKeyword("THEN");
    s.children = statementList({"ELSIF", "ELSE", "END_IF"});
    if (atKeyword("ELSIF")) {
      s.elseChildren.push_back(ifStatementTail());
      return s;
    }
    if (atKeyword("ELSE")) {
      next();
      s.elseChildren = statementList({"END_IF"});
    }
    expectKeyword("END_IF");
    return s;
  }

  // A CASE label list: label {',' label} ':' where a label is an optionally
  // signed literal, a (dotted) identifier, or a range.
  bool looksLikeCaseLabel() const {
    std::size_t i = 0;
    while (true) {
      if (at(i).kind == Tok::Op && at(i).text == "-") ++i;
      const Token& t = at(i);
      if (t.kind == Tok::Integer || t.kind == Tok::TypedLiteral || t.kind == Tok::String) {
        ++i;
      } else if (t.kind == Tok::Ident && !kReserved.count(upper(t.text))) {
        ++i;
        while (at(i).kind == Tok::Dot && at(i + 1).kind == Tok::Ident) i += 2;
      } else {
        return false;
      }
      if (at(i).kind == Tok::Range) {
        ++i;
        continue;
      }
      if (at(i).kind == Tok::Comma) {
        ++i;
        continue;
      }
      return at(i).kind == Tok::Colon;
    }
  }

  std::string caseLabel() {
    std::string text;
    while (true) {
      if (cur().kind == Tok::Op && cur().text == "-") {
        text += "-";
        next();
      }
      if (cur().kind == Tok::Ident) {
        text += reference();
      } else {
        text += cur().text;
        next();
      }
      if (cur().kind != Tok::Range) break;
      text += "..";
      next();
    }
    return text;
  }

  Statement caseStatement() {
    next();  // CASE
    Statement s;
    s.kind = StatementKind::Case;
    s.condition = expression();
    expectKeyword("OF");
    while (true) {
      skipSemicolons();
      if (atKeyword("ELSE") || atKeyword("END_CASE")) break;
      if (!looksLikeCaseLabel()) failHere("expected a CASE label");
      CaseBranch branch;
      branch.labels.push_back(caseLabel());
      while (cur().kind == Tok::Comma) {
        next();
        branch.labels.push_back(caseLabel());
      }
      expect(Tok::Colon, "':'");
      branch.statements = statementList({"ELSE", "END_CASE"}, true);
      s.caseBranches.push_back(std::move(branch));
    }
    if (atKeyword("ELSE")) {
      next();
      s.elseChildren = statementList({"END_CASE"});
    }
    expectKeyword("END_CASE");
    return s;
  }

  Statement forStatement() {
    next();  // FOR
    Statement s;
    s.kind = StatementKind::For;
    if (cur().kind != Tok::Ident) failHere("expected loop variable");
    s.target = reference();
    expect(Tok::Assign, "':='");
    s.from = expression();
    expectKeyword("TO");
    s.to = expression();
    if (atKeyword("BY")) {
      next();
      s.by = expression();
    }
    expectKeyword("DO");
    s.children = statementList({"END_FOR"});
    expectKeyword("END_FOR");
    return s;
  }

  Statement whileStatement() {
    next();  // WHILE
    Statement s;
    s.kind = StatementKind::While;
    s.condition = expression();
    expectKeyword("DO");
    s.children = statementList({"END_WHILE"});
    expectKeyword("END_WHILE");
    return s;
  }

  std::vector<CallArgument> callArguments() {
    std::vector<CallArgument> args;
    if (cur().kind == Tok::RParen) {
      next();
      return args;
    }
    while (true) {
      CallArgument a;
      if (cur().kind == Tok::Ident && (at(1).kind == Tok::Assign || at(1).kind == Tok::OutAssign)) {
        a.name = cur().text;
        next();
        a.output = cur().kind == Tok::OutAssign;
        next();
      }
      a.value = expression();
      args.push_back(std::move(a));
      if (cur().kind == Tok::Comma) {
        next();
        continue;
      }
      expect(Tok::RParen, "')'");
      return args;
    }
  }

  // Qualified or indexed variable reference, rendered canonically:
  // "a.b", "arr[i + 1]", "fb.out[2].x".
  std::string reference() {
    if (cur().kind != Tok::Ident) failHere("expected identifier");
    std::string text = cur().text;
    next();
    while (true) {
      if (cur().kind == Tok::Dot && at(1).kind == Tok::Ident) {
        next();
        text += "." + cur().text;
        next();
      } else if (cur().kind == Tok::LBracket) {
        next();
        text += "[";
        bool first = true;
        while (true) {
          if (!first) text += ",";
          first = false;
          text += render(expression());
          if (cur().kind == Tok::Comma) {
            next();
            continue;
          }
          break;
        }
        expect(Tok::RBracket, "']'");
        text += "]";
      } else {
        return text;
      }
    }
  }

  Expression expression() { return orExpr(); }

  bool atOp(std::string_view op) const {
    return cur().kind == Tok::Op && cur().text == op;
  }

  Expression orExpr() {
    Expression lhs = xorExpr();
    while (atKeyword("OR")) {
      next();
      lhs = Expression::binary(BinaryOperator::Or, std::move(lhs), xorExpr());
    }
    return lhs;
  }

  Expression xorExpr() {
    Expression lhs = andExpr();
    while (atKeyword("XOR")) {
      next();
      lhs = Expression::binary(BinaryOperator::Xor, std::move(lhs), andExpr());
    }
    return lhs;
  }

  Expression andExpr() {
    Expression lhs = equalityExpr();
    while (atKeyword("AND") || atOp("&")) {
      next();
      lhs = Expression::binary(BinaryOperator::And, std::move(lhs), equalityExpr());
    }
    return lhs;
  }

  Expression equalityExpr() {
    Expression lhs = relationalExpr();
    while (atOp("=") || atOp("<>")) {
      auto op = atOp("=") ? BinaryOperator::Eq : BinaryOperator::Ne;
      next();
      lhs = Expression::binary(op, std::move(lhs), relationalExpr());
    }
    return lhs;
  }

  Expression relationalExpr() {
    Expression lhs = additiveExpr();
    while (atOp("<") || atOp(">") || atOp("<=") || atOp(">=")) {
      BinaryOperator op = atOp("<")    ? BinaryOperator::Lt
                          : atOp(">")  ? BinaryOperator::Gt
                          : atOp("<=") ? BinaryOperator::Le
                                       : BinaryOperator::Ge;
      next();
      lhs = Expression::binary(op, std::move(lhs), additiveExpr());
    }
    return lhs;
  }

  Expression additiveExpr() {
    Expression lhs = multiplicativeExpr();
    while (atOp("+") || atOp("-")) {
      auto op = atOp("+") ? BinaryOperator::Add : BinaryOperator::Sub;
      next();
      lhs = Expression::binary(op, std::move(lhs), multiplicativeExpr());
    }
    return lhs;
  }

  Expression multiplicativeExpr() {
    Expression lhs = unaryExpr();
    while (atOp("*") || atOp("/") || atKeyword("MOD")) {
      BinaryOperator op = atOp("*")   ? BinaryOperator::Mul
                          : atOp("/") ? BinaryOperator::Div
                                      : BinaryOperator::Mod;
      next();
      lhs = Expression::binary(op, std::move(lhs), unaryExpr());
    }
    return lhs;
  }

  Expression unaryExpr() {
    if (atKeyword("NOT")) {
      next();
      return Expression::unary(UnaryOperator::Not, unaryExpr());
    }
    if (atOp("-")) {
      next();
      Expression operand = unaryExpr();
      if (operand.kind == Expression::Kind::Literal &&
          (operand.literalType == "INT" || operand.literalType == "REAL") &&
          !operand.text.empty() && operand.text[0] != '-') {
        operand.text = "-" + operand.text;
        return operand;
      }
      return Expression::unary(UnaryOperator::Neg, std::move(operand));
    }
    if (atOp("+")) {
      next();
      return unaryExpr();
    }
    return powerExpr();
  }

  Expression powerExpr() {
    Expression lhs = primary();
    while (atOp("**")) {
      next();
      lhs = Expression::binary(BinaryOperator::Pow, std::move(lhs), primary());
    }
    return lhs;
  }

  Expression primary() {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::Integer: {
        auto e = Expression::literal(t.text, "INT");
        next();
        return e;
      }
      case Tok::Real: {
        auto e = Expression::literal(t.text, "REAL");
        next();
        return e;
      }
      case Tok::String:
      case Tok::TypedLiteral: {
        auto e = Expression::literal(t.text, t.literalType);
        next();
        return e;
      }
      case Tok::LParen: {
        next();
        Expression inner = expression();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        std::string kw = upper(t.text);
        if (kw == "TRUE" || kw == "FALSE") {
          next();
          return Expression::literal(kw, "BOOL");
        }
        if (kReserved.count(kw)) failHere("unexpected keyword " + kw + " in expression");
        std::string name = reference();
        if (cur().kind == Tok::LParen) {
          next();
          std::vector<Expression> args;
          for (auto& a : callArguments()) args.push_back(std::move(a.value));
          return Expression::call(std::move(name), std::move(args));
        }
        return Expression::varRef(std::move(name));
      }
      case Tok::End:
        failHere("unexpected end of input in expression");
      default:
        failHere("unexpected '" + t.text + "' in expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error(positionPrefix(line, column) + message),
      line_(line),
      column_(column) {}

UnsupportedConstructError::UnsupportedConstructError(const std::string& construct,
                                                     int line, int column)
    : ParseError("unsupported construct " + construct, line, column),
      construct_(construct) {}

UnsupportedConstructError::UnsupportedConstructError(const std::string& construct,
                                                     const std::string& message)
    : ParseError(message), construct_(construct) {}

StBody parseStructuredText(std::string_view text) {
  return Parser(Lexer(text).run()).statementsToEnd();
}

Expression parseExpression(std::string_view text) {
  return Parser(Lexer(text).run()).expressionToEnd();
}

}  // namespace iecclone
