#include <cctype>
#include <string>

#include "iecclone/st_parser.hpp"

namespace iecclone {

namespace {

bool allDigits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool startsWith(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// The type the lexer infers for the literal text without a type prefix.
std::string_view impliedType(std::string_view text) {
  if (text == "TRUE" || text == "FALSE") return "BOOL";
  if (!text.empty() && text.front() == '\'') return "STRING";
  if (!text.empty() && text.front() == '"') return "WSTRING";
  if (startsWith(text, "T#")) return "TIME";
  if (startsWith(text, "LTIME#")) return "LTIME";
  if (startsWith(text, "TOD#")) return "TOD";
  if (startsWith(text, "DT#")) return "DT";
  if (startsWith(text, "D#")) return "D";
  std::string_view body = text;
  if (!body.empty() && body.front() == '-') body.remove_prefix(1);
  if (auto hash = body.find('#'); hash != std::string_view::npos) {
    return allDigits(body.substr(0, hash)) ? "INT" : "";
  }
  if (allDigits(body)) return "INT";
  auto dot = body.find('.');
  auto exp = body.find('E');
  if (dot != std::string_view::npos || exp != std::string_view::npos) return "REAL";
  return "";
}

std::string literalSource(const Expression& e) {
  if (impliedType(e.text) == e.literalType) return e.text;
  return e.literalType + "#" + e.text;
}

std::string operand(const Expression& e) {
  std::string s = printExpression(e);
  const bool wrap = e.kind == Expression::Kind::Binary || e.kind == Expression::Kind::Unary ||
                    (e.kind == Expression::Kind::Literal && !s.empty() && s.front() == '-');
  return wrap ? "(" + s + ")" : s;
}

void indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

void printList(const std::vector<Statement>& list, int depth, std::string& out);

void printStatement(const Statement& s, int depth, std::string& out) {
  indent(out, depth);
  switch (s.kind) {
    case StatementKind::Assignment:
      out += s.target + " := " + printExpression(*s.value) + ";\n";
      return;
    case StatementKind::Call: {
      out += s.callee + "(";
      for (std::size_t i = 0; i < s.args.size(); ++i) {
        const auto& a = s.args[i];
        if (i) out += ", ";
        if (!a.name.empty()) out += a.name + (a.output ? " => " : " := ");
        out += printExpression(a.value);
      }
      out += ");\n";
      return;
    }
    case StatementKind::If:
      out += "IF " + printExpression(*s.condition) + " THEN\n";
      printList(s.children, depth + 1, out);
      if (!s.elseChildren.empty()) {
        indent(out, depth);
        out += "ELSE\n";
        printList(s.elseChildren, depth + 1, out);
      }
      indent(out, depth);
      out += "END_IF;\n";
      return;
    case StatementKind::Case:
      out += "CASE " + printExpression(*s.condition) + " OF\n";
      for (const auto& b : s.caseBranches) {
        indent(out, depth + 1);
        for (std::size_t i = 0; i < b.labels.size(); ++i) out += (i ? ", " : "") + b.labels[i];
        out += ":\n";
        printList(b.statements, depth + 2, out);
      }
      if (!s.elseChildren.empty()) {
        indent(out, depth);
        out += "ELSE\n";
        printList(s.elseChildren, depth + 1, out);
      }
      indent(out, depth);
      out += "END_CASE;\n";
      return;
    case StatementKind::For:
      out += "FOR " + s.target + " := " + printExpression(*s.from) + " TO " +
             printExpression(*s.to);
      if (s.by) out += " BY " + printExpression(*s.by);
      out += " DO\n";
      printList(s.children, depth + 1, out);
      indent(out, depth);
      out += "END_FOR;\n";
      return;
    case StatementKind::While:
      out += "WHILE " + printExpression(*s.condition) + " DO\n";
      printList(s.children, depth + 1, out);
      indent(out, depth);
      out += "END_WHILE;\n";
      return;
  }
}

void printList(const std::vector<Statement>& list, int depth, std::string& out) {
  for (const auto& s : list) printStatement(s, depth, out);
}

}  // namespace

std::string printExpression(const Expression& e) {
  switch (e.kind) {
    case Expression::Kind::Literal: return literalSource(e);
    case Expression::Kind::VarRef: return e.text;
    case Expression::Kind::Unary:
      return (e.unaryOp == UnaryOperator::Not ? "NOT " : "-") + operand(e.operands.at(0));
    case Expression::Kind::Binary:
      return operand(e.operands.at(0)) + " " + std::string(toString(e.binaryOp)) + " " +
             operand(e.operands.at(1));
    case Expression::Kind::FuncCall: {
      std::string s = e.text + "(";
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i) s += ", ";
        s += printExpression(e.operands[i]);
      }
      return s + ")";
    }
  }
  return {};
}

std::string printStructuredText(const StBody& body) {
  std::string out;
  printList(body.statements, 0, out);
  return out;
}

}  // namespace iecclone
