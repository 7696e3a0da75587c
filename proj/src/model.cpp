#include "iecclone/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <set>
#include <unordered_set>

namespace iecclone {

namespace {

constexpr std::array<std::string_view, 16> kArtifactTypeNames = {
    "project", "pou",        "variable", "stBody",  "sfcBody", "ldBody",
    "fbdBody", "statement",  "step",     "transition", "action", "network",
    "contact", "coil",       "block",    "expression",
};

bool isDecimal(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void appendStatements(std::vector<ChildEntry>& out,
                      const std::vector<Statement>& list,
                      const std::string& role) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    out.push_back({&list[i], {role, std::to_string(i)}});
  }
}

void appendExpr(std::vector<ChildEntry>& out, const std::optional<Expression>& e,
                const char* role) {
  if (e) out.push_back({&*e, {role, "0"}});
}

}  // namespace

std::string_view toString(ArtifactType type) {
  return kArtifactTypeNames[static_cast<std::size_t>(type)];
}

std::optional<ArtifactType> artifactTypeFromString(std::string_view name) {
  for (std::size_t i = 0; i < kArtifactTypeNames.size(); ++i) {
    if (kArtifactTypeNames[i] == name) return static_cast<ArtifactType>(i);
  }
  return std::nullopt;
}

std::string_view toString(Language language) {
  switch (language) {
    case Language::ST: return "ST";
    case Language::SFC: return "SFC";
    case Language::LD: return "LD";
    case Language::FBD: return "FBD";
  }
  return "?";
}

ArtifactType bodyTypeOf(Language language) {
  switch (language) {
    case Language::ST: return ArtifactType::StBody;
    case Language::SFC: return ArtifactType::SfcBody;
    case Language::LD: return ArtifactType::LdBody;
    case Language::FBD: return ArtifactType::FbdBody;
  }
  return ArtifactType::StBody;
}

std::string_view toString(BinaryOperator op) {
  switch (op) {
    case BinaryOperator::And: return "AND";
    case BinaryOperator::Or: return "OR";
    case BinaryOperator::Xor: return "XOR";
    case BinaryOperator::Eq: return "=";
    case BinaryOperator::Ne: return "<>";
    case BinaryOperator::Lt: return "<";
    case BinaryOperator::Le: return "<=";
    case BinaryOperator::Gt: return ">";
    case BinaryOperator::Ge: return ">=";
    case BinaryOperator::Add: return "+";
    case BinaryOperator::Sub: return "-";
    case BinaryOperator::Mul: return "*";
    case BinaryOperator::Div: return "/";
    case BinaryOperator::Mod: return "MOD";
    case BinaryOperator::Pow: return "**";
  }
  return "?";
}

std::string_view toString(UnaryOperator op) {
  return op == UnaryOperator::Not ? "NOT" : "-";
}

Expression Expression::binary(BinaryOperator op, Expression lhs,
                              Expression rhs) {
  Expression e;
  e.kind = Kind::Binary;
  e.binaryOp = op;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

Expression Expression::unary(UnaryOperator op, Expression operand) {
  Expression e;
  e.kind = Kind::Unary;
  e.unaryOp = op;
  e.operands.push_back(std::move(operand));
  return e;
}

Expression Expression::literal(std::string value, std::string type) {
  Expression e;
  e.kind = Kind::Literal;
  e.text = std::move(value);
  e.literalType = std::move(type);
  return e;
}

Expression Expression::varRef(std::string name) {
  Expression e;
  e.kind = Kind::VarRef;
  e.text = std::move(name);
  return e;
}

Expression Expression::call(std::string name, std::vector<Expression> args) {
  Expression e;
  e.kind = Kind::FuncCall;
  e.text = std::move(name);
  e.operands = std::move(args);
  return e;
}

std::size_t nodeCount(const Expression& expr) {
  std::size_t n = 1;
  for (const auto& op : expr.operands) n += nodeCount(op);
  return n;
}

std::string render(const Expression& expr) {
  switch (expr.kind) {
    case Expression::Kind::Literal:
    case Expression::Kind::VarRef:
      return expr.text;
    case Expression::Kind::Unary: {
      std::string inner = render(expr.operands.at(0));
      if (expr.unaryOp == UnaryOperator::Not) return "NOT " + inner;
      return "-" + inner;
    }
    case Expression::Kind::Binary: {
      auto side = [](const Expression& e) {
        std::string s = render(e);
        return e.kind == Expression::Kind::Binary ? "(" + s + ")" : s;
      };
      return side(expr.operands.at(0)) + " " +
             std::string(toString(expr.binaryOp)) + " " +
             side(expr.operands.at(1));
    }
    case Expression::Kind::FuncCall: {
      std::string s = expr.text + "(";
      for (std::size_t i = 0; i < expr.operands.size(); ++i) {
        if (i) s += ", ";
        s += render(expr.operands[i]);
      }
      return s + ")";
    }
  }
  return {};
}

std::string_view toString(StatementKind kind) {
  switch (kind) {
    case StatementKind::If: return "if";
    case StatementKind::Case: return "case";
    case StatementKind::For: return "for";
    case StatementKind::While: return "while";
    case StatementKind::Assignment: return "assignment";
    case StatementKind::Call: return "call";
  }
  return "?";
}

bool CaseBranch::operator==(const CaseBranch& other) const {
  return labels == other.labels && statements == other.statements;
}

bool Statement::operator==(const Statement& other) const {
  return kind == other.kind && condition == other.condition &&
         target == other.target && value == other.value &&
         callee == other.callee && args == other.args && from == other.from &&
         to == other.to && by == other.by && children == other.children &&
         caseBranches == other.caseBranches &&
         elseChildren == other.elseChildren;
}

std::string_view toString(ActionQualifier qualifier) {
  switch (qualifier) {
    case ActionQualifier::N: return "N";
    case ActionQualifier::R: return "R";
    case ActionQualifier::S: return "S";
    case ActionQualifier::L: return "L";
    case ActionQualifier::D: return "D";
    case ActionQualifier::P: return "P";
    case ActionQualifier::SD: return "SD";
    case ActionQualifier::DS: return "DS";
    case ActionQualifier::SL: return "SL";
    case ActionQualifier::Entry: return "P1";
    case ActionQualifier::Exit: return "P0";
  }
  return "?";
}

std::optional<ActionQualifier> actionQualifierFromString(std::string_view text) {
  std::string upper(text);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper.empty() || upper == "N") return ActionQualifier::N;
  if (upper == "R") return ActionQualifier::R;
  if (upper == "S") return ActionQualifier::S;
  if (upper == "L") return ActionQualifier::L;
  if (upper == "D") return ActionQualifier::D;
  if (upper == "P") return ActionQualifier::P;
  if (upper == "SD") return ActionQualifier::SD;
  if (upper == "DS") return ActionQualifier::DS;
  if (upper == "SL") return ActionQualifier::SL;
  if (upper == "P1" || upper == "ENTRY") return ActionQualifier::Entry;
  if (upper == "P0" || upper == "EXIT") return ActionQualifier::Exit;
  return std::nullopt;
}

std::string_view toString(CoilStorage storage) {
  switch (storage) {
    case CoilStorage::Normal: return "normal";
    case CoilStorage::Set: return "set";
    case CoilStorage::Reset: return "reset";
  }
  return "?";
}

std::string_view toString(VarSection section) {
  switch (section) {
    case VarSection::Input: return "input";
    case VarSection::Output: return "output";
    case VarSection::InOut: return "inOut";
    case VarSection::Local: return "local";
    case VarSection::Global: return "global";
    case VarSection::Temp: return "temp";
  }
  return "?";
}

std::string_view toString(PouKind kind) {
  switch (kind) {
    case PouKind::Program: return "program";
    case PouKind::Function: return "function";
    case PouKind::FunctionBlock: return "functionBlock";
  }
  return "?";
}

ArtifactType typeOf(const ArtifactRef& ref) {
  return std::visit(
      Overloaded{
          [](const Project*) { return ArtifactType::Project; },
          [](const Pou*) { return ArtifactType::Pou; },
          [](const VariableDecl*) { return ArtifactType::Variable; },
          [](const StBody*) { return ArtifactType::StBody; },
          [](const SfcBody*) { return ArtifactType::SfcBody; },
          [](const LdBody*) { return ArtifactType::LdBody; },
          [](const FbdBody*) { return ArtifactType::FbdBody; },
          [](const Statement*) { return ArtifactType::Statement; },
          [](const Step*) { return ArtifactType::Step; },
          [](const Transition*) { return ArtifactType::Transition; },
          [](const NamedAction*) { return ArtifactType::Action; },
          [](const LdNetwork*) { return ArtifactType::Network; },
          [](const FbdNetwork*) { return ArtifactType::Network; },
          [](const Contact*) { return ArtifactType::Contact; },
          [](const Coil*) { return ArtifactType::Coil; },
          [](const FbdBlock*) { return ArtifactType::Block; },
          [](const Expression*) { return ArtifactType::Expression; },
      },
      ref);
}

ArtifactRef bodyRef(const LanguageBody& body) {
  return std::visit([](const auto& b) -> ArtifactRef { return &b; },
                    body.content);
}

int compareSegments(const PathSegment& a, const PathSegment& b) {
  if (int c = a.role.compare(b.role); c != 0) return c < 0 ? -1 : 1;
  if (isDecimal(a.key) && isDecimal(b.key)) {
    if (a.key.size() != b.key.size()) return a.key.size() < b.key.size() ? -1 : 1;
  }
  int c = a.key.compare(b.key);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

ArtifactPath ArtifactPath::child(PathSegment segment) const {
  ArtifactPath p = *this;
  p.segments_.push_back(std::move(segment));
  return p;
}

ArtifactPath ArtifactPath::child(std::string role, std::string key) const {
  return child(PathSegment{std::move(role), std::move(key)});
}

bool ArtifactPath::isPrefixOf(const ArtifactPath& other) const {
  if (segments_.size() > other.segments_.size()) return false;
  return std::equal(segments_.begin(), segments_.end(), other.segments_.begin());
}

std::string ArtifactPath::toString() const {
  std::string out;
  for (const auto& s : segments_) {
    if (!out.empty()) out += '/';
    out += s.role;
    out += '/';
    out += s.key;
  }
  return out;
}

ArtifactPath ArtifactPath::fromString(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  if (text.empty()) return {};
  while (true) {
    std::size_t slash = text.find('/', start);
    parts.emplace_back(text.substr(start, slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  if (parts.size() % 2 != 0) {
    throw ModelError("malformed artifact path '" + std::string(text) + "'");
  }
  std::vector<PathSegment> segs;
  for (std::size_t i = 0; i < parts.size(); i += 2) {
    segs.push_back({parts[i], parts[i + 1]});
  }
  return ArtifactPath(std::move(segs));
}

bool operator<(const ArtifactPath& a, const ArtifactPath& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compareSegments(a.segments_[i], b.segments_[i]);
    if (c != 0) return c < 0;
  }
  return a.size() < b.size();
}

std::vector<ChildEntry> childEntries(const ArtifactRef& artifact) {
  std::vector<ChildEntry> out;
  auto addBody = [&out](const LanguageBody& body, const char* role) {
    out.push_back({bodyRef(body), {role, std::string(toString(body.language()))}});
  };
  std::visit(
      Overloaded{
          [&](const Project* p) {
            for (const auto& pou : p->pous) out.push_back({&pou, {"pous", pou.name}});
            for (const auto& v : p->globalVariables) out.push_back({&v, {"globals", v.name}});
          },
          [&](const Pou* p) {
            for (const auto& v : p->variables) out.push_back({&v, {"variables", v.name}});
            addBody(p->body, "body");
            for (const auto& a : p->actions) out.push_back({&a, {"actions", a.name}});
          },
          [&](const VariableDecl*) {},
          [&](const StBody* b) { appendStatements(out, b->statements, "statements"); },
          [&](const SfcBody* b) {
            for (const auto& s : b->steps) out.push_back({&s, {"steps", s.name}});
            for (std::size_t i = 0; i < b->transitions.size(); ++i) {
              out.push_back({&b->transitions[i], {"transitions", std::to_string(i)}});
            }
          },
          [&](const LdBody* b) {
            for (std::size_t i = 0; i < b->networks.size(); ++i) {
              out.push_back({&b->networks[i], {"networks", std::to_string(i)}});
            }
          },
          [&](const FbdBody* b) {
            for (std::size_t i = 0; i < b->networks.size(); ++i) {
              out.push_back({&b->networks[i], {"networks", std::to_string(i)}});
            }
          },
          [&](const Statement* s) {
            appendExpr(out, s->condition, "condition");
            appendExpr(out, s->value, "value");
            appendExpr(out, s->from, "from");
            appendExpr(out, s->to, "to");
            appendExpr(out, s->by, "by");
            for (std::size_t i = 0; i < s->args.size(); ++i) {
              out.push_back({&s->args[i].value, {"args", std::to_string(i)}});
            }
            appendStatements(out, s->children, "children");
            for (std::size_t k = 0; k < s->caseBranches.size(); ++k) {
              appendStatements(out, s->caseBranches[k].statements,
                               "case" + std::to_string(k));
            }
            appendStatements(out, s->elseChildren, "else");
          },
          [&](const Step*) {},
          [&](const Transition* t) { appendExpr(out, t->condition, "condition"); },
          [&](const NamedAction* a) { addBody(a->body, "body"); },
          [&](const LdNetwork* n) {
            for (std::size_t i = 0; i < n->elements.size(); ++i) {
              std::visit([&](const auto& e) {
                out.push_back({&e, {"elements", std::to_string(i)}});
              }, n->elements[i]);
            }
          },
          [&](const FbdNetwork* n) {
            for (std::size_t i = 0; i < n->blocks.size(); ++i) {
              out.push_back({&n->blocks[i], {"blocks", std::to_string(i)}});
            }
            for (std::size_t i = 0; i < n->endpoints.size(); ++i) {
              out.push_back({&n->endpoints[i], {"endpoints", std::to_string(i)}});
            }
            if (n->nestedSt) out.push_back({&*n->nestedSt, {"nestedSt", "ST"}});
          },
          [&](const Contact*) {},
          [&](const Coil*) {},
          [&](const FbdBlock*) {},
          [&](const Expression* e) {
            for (std::size_t i = 0; i < e->operands.size(); ++i) {
              out.push_back({&e->operands[i], {"operands", std::to_string(i)}});
            }
          },
      },
      artifact);
  return out;
}

std::vector<ChildEntry> childEntries(const ArtifactRef& artifact,
                                     ArtifactType type) {
  std::vector<ChildEntry> all = childEntries(artifact);
  std::vector<ChildEntry> out;
  out.reserve(all.size());
  for (auto& c : all) {
    if (typeOf(c.ref) == type) out.push_back(std::move(c));
  }
  return out;
}

std::vector<ArtifactRef> childrenOf(const ArtifactRef& artifact,
                                    ArtifactType type) {
  std::vector<ArtifactRef> out;
  for (const auto& c : childEntries(artifact, type)) out.push_back(c.ref);
  return out;
}

bool canContain(ArtifactType parent, ArtifactType child) {
  using T = ArtifactType;
  auto isBody = [](T t) {
    return t == T::StBody || t == T::SfcBody || t == T::LdBody || t == T::FbdBody;
  };
  switch (parent) {
    case T::Project: return child == T::Pou || child == T::Variable;
    case T::Pou: return child == T::Variable || child == T::Action || isBody(child);
    case T::Action: return isBody(child);
    case T::StBody: return child == T::Statement;
    case T::SfcBody: return child == T::Step || child == T::Transition;
    case T::LdBody: return child == T::Network;
    case T::FbdBody: return child == T::Network;
    case T::Statement: return child == T::Statement || child == T::Expression;
    case T::Transition: return child == T::Expression;
    case T::Network:
      return child == T::Contact || child == T::Coil || child == T::Block ||
             child == T::Expression || child == T::StBody;
    case T::Expression: return child == T::Expression;
    default: return false;
  }
}

namespace {

bool sameNode(const ArtifactRef& a, const ArtifactRef& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](auto pa) {
        return static_cast<const void*>(pa) ==
               static_cast<const void*>(std::get<decltype(pa)>(b));
      },
      a);
}

bool findPath(const ArtifactRef& current, const ArtifactRef& target,
              std::vector<PathSegment>& trail) {
  if (sameNode(current, target)) return true;
  for (auto& c : childEntries(current)) {
    trail.push_back(c.segment);
    if (findPath(c.ref, target, trail)) return true;
    trail.pop_back();
  }
  return false;
}

}  // namespace

ArtifactPath pathOf(const Project& project, const ArtifactRef& artifact) {
  std::vector<PathSegment> trail;
  if (!findPath(&project, artifact, trail)) {
    throw ModelError("artifact '" + describe(artifact) +
                     "' is not part of project '" + project.name + "'");
  }
  return ArtifactPath(std::move(trail));
}

std::optional<ArtifactRef> resolve(const Project& project,
                                   const ArtifactPath& path) {
  ArtifactRef current = &project;
  for (const auto& seg : path.segments()) {
    bool found = false;
    for (auto& c : childEntries(current)) {
      if (c.segment == seg) {
        current = c.ref;
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  return current;
}

std::string describe(const ArtifactRef& artifact) {
  return std::visit(
      Overloaded{
          [](const Project* p) { return "Project " + p->name; },
          [](const Pou* p) {
            return "POU " + p->name + " (" + std::string(toString(p->kind)) + ")";
          },
          [](const VariableDecl* v) { return "Variable " + v->name + " : " + v->dataType; },
          [](const StBody* b) {
            return "ST body (" + std::to_string(b->statements.size()) + " statements)";
          },
          [](const SfcBody* b) {
            return "SFC body (" + std::to_string(b->steps.size()) + " steps)";
          },
          [](const LdBody* b) {
            return "LD body (" + std::to_string(b->networks.size()) + " networks)";
          },
          [](const FbdBody* b) {
            return "FBD body (" + std::to_string(b->networks.size()) + " networks)";
          },
          [](const Statement* s) {
            switch (s->kind) {
              case StatementKind::Assignment:
                return "Assignment " + s->target + " := " +
                       (s->value ? render(*s->value) : std::string());
              case StatementKind::Call:
                return "Call " + s->callee + "(" + std::to_string(s->args.size()) +
                       " args)";
              case StatementKind::If:
                return "IF " + (s->condition ? render(*s->condition) : std::string());
              case StatementKind::While:
                return "WHILE " + (s->condition ? render(*s->condition) : std::string());
              case StatementKind::Case:
                return "CASE " + (s->condition ? render(*s->condition) : std::string());
              case StatementKind::For:
                return "FOR " + s->target;
            }
            return std::string("Statement");
          },
          [](const Step* s) { return std::string(s->initial ? "Initial step " : "Step ") + s->name; },
          [](const Transition* t) {
            std::string cond = t->condition ? render(*t->condition) : t->bodyRef;
            return "Transition [" + cond + "]";
          },
          [](const NamedAction* a) {
            return "Action " + a->name + " (" + std::string(toString(a->body.language())) + ")";
          },
          [](const LdNetwork* n) {
            return "LD network" + (n->label ? " " + *n->label : std::string());
          },
          [](const FbdNetwork* n) {
            return "FBD network" + (n->label ? " " + *n->label : std::string());
          },
          [](const Contact* c) {
            return std::string(c->negated ? "Contact /" : "Contact ") + c->variable;
          },
          [](const Coil* c) {
            return "Coil " + c->variable +
                   (c->storage == CoilStorage::Normal
                        ? std::string()
                        : " (" + std::string(toString(c->storage)) + ")");
          },
          [](const FbdBlock* b) {
            return "Block " + b->typeName + (b->instanceName ? " " + *b->instanceName : std::string());
          },
          [](const Expression* e) { return "Expression " + render(*e); },
      },
      artifact);
}

bool isIdentifier(std::string_view text) {
  if (text.empty()) return false;
  auto first = static_cast<unsigned char>(text.front());
  if (!(std::isalpha(first) || first == '_')) return false;
  return std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

std::string_view rootIdentifier(std::string_view reference) {
  std::size_t cut = reference.find_first_of(".[");
  return reference.substr(0, cut);
}

std::size_t totalStatementCount(const StBody& body) {
  std::function<std::size_t(const std::vector<Statement>&)> count =
      [&](const std::vector<Statement>& list) {
        std::size_t n = 0;
        for (const auto& s : list) {
          n += 1 + count(s.children) + count(s.elseChildren);
          for (const auto& b : s.caseBranches) n += count(b.statements);
        }
        return n;
      };
  return count(body.statements);
}

std::size_t maxNestingDepth(const StBody& body) {
  std::function<std::size_t(const std::vector<Statement>&)> depth =
      [&](const std::vector<Statement>& list) -> std::size_t {
        std::size_t best = 0;
        for (const auto& s : list) {
          std::size_t inner = std::max(depth(s.children), depth(s.elseChildren));
          for (const auto& b : s.caseBranches) inner = std::max(inner, depth(b.statements));
          best = std::max(best, 1 + inner);
        }
        return best;
      };
  return depth(body.statements);
}

std::vector<const Expression*> ownExpressions(const Statement& statement) {
  std::vector<const Expression*> out;
  for (const auto* e : {&statement.condition, &statement.value, &statement.from,
                        &statement.to, &statement.by}) {
    if (*e) out.push_back(&**e);
  }
  for (const auto& a : statement.args) out.push_back(&a.value);
  return out;
}

// ---------------------------------------------------------------------------
// Invariants
// ---------------------------------------------------------------------------

namespace {

class InvariantChecker {
 public:
  explicit InvariantChecker(std::vector<std::string>& out) : out_(out) {}

  void project(const Project& p) {
    if (!isIdentifier(p.name)) fail("", "project name '" + p.name + "' is not an identifier");
    uniqueNames(p.pous, "", "POU");
    uniqueNames(p.globalVariables, "", "global variable");
    for (const auto& v : p.globalVariables) variable(v, "globals/" + v.name);
    for (const auto& pou : p.pous) this->pou(pou, "pous/" + pou.name);
  }

 private:
  template <class T>
  void uniqueNames(const std::vector<T>& items, const std::string& where,
                   const char* what) {
    std::set<std::string> seen;
    for (const auto& item : items) {
      if (!seen.insert(item.name).second) {
        fail(where, std::string("duplicate ") + what + " name '" + item.name + "'");
      }
    }
  }

  void fail(const std::string& where, const std::string& message) {
    out_.push_back(where.empty() ? message : where + ": " + message);
  }

  void variable(const VariableDecl& v, const std::string& where) {
    if (!isIdentifier(v.name)) fail(where, "variable name is not an identifier");
    if (v.dataType.empty()) fail(where, "variable has no data type");
  }

  void pou(const Pou& p, const std::string& where) {
    if (!isIdentifier(p.name)) fail(where, "POU name is not an identifier");
    if ((p.kind == PouKind::Function) != p.returnType.has_value()) {
      fail(where, "return type must be present exactly for functions");
    }
    uniqueNames(p.variables, where, "variable");
    uniqueNames(p.actions, where, "action");
    for (const auto& v : p.variables) variable(v, where + "/variables/" + v.name);
    currentPou_ = &p;
    body(p.body, where + "/body");
    for (const auto& a : p.actions) {
      if (!isIdentifier(a.name)) fail(where, "action name '" + a.name + "' is not an identifier");
      body(a.body, where + "/actions/" + a.name + "/body");
    }
    currentPou_ = nullptr;
  }

  void body(const LanguageBody& b, const std::string& where) {
    std::visit(Overloaded{
                   [&](const StBody& st) { statements(st.statements, where); },
                   [&](const SfcBody& sfc) { this->sfc(sfc, where); },
                   [&](const LdBody& ld) { this->ld(ld, where); },
                   [&](const FbdBody& fbd) { this->fbd(fbd, where); },
               },
               b.content);
  }

  void statements(const std::vector<Statement>& list, const std::string& where) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      statement(list[i], where + "/" + std::to_string(i));
    }
  }

  void statement(const Statement& s, const std::string& where) {
    switch (s.kind) {
      case StatementKind::Assignment:
        if (s.target.empty() || !s.value) fail(where, "assignment needs a target and a value");
        break;
      case StatementKind::Call:
        if (s.callee.empty()) fail(where, "call needs a callee");
        break;
      case StatementKind::If:
      case StatementKind::While:
        if (!s.condition) fail(where, "conditional statement without condition");
        break;
      case StatementKind::Case:
        if (!s.condition) fail(where, "CASE without selector");
        break;
      case StatementKind::For:
        if (s.target.empty() || !s.from || !s.to) fail(where, "FOR needs a loop variable and bounds");
        break;
    }
    for (const auto* e : ownExpressions(s)) expression(*e, where);
    statements(s.children, where);
    statements(s.elseChildren, where);
    for (const auto& b : s.caseBranches) statements(b.statements, where);
  }

  void expression(const Expression& e, const std::string& where) {
    std::size_t expected = 0;
    switch (e.kind) {
      case Expression::Kind::Binary: expected = 2; break;
      case Expression::Kind::Unary: expected = 1; break;
      case Expression::Kind::Literal:
      case Expression::Kind::VarRef:
        expected = 0;
        if (e.text.empty()) fail(where, "empty literal or reference");
        break;
      case Expression::Kind::FuncCall:
        expected = e.operands.size();
        if (e.text.empty()) fail(where, "function call without name");
        break;
    }
    if (e.operands.size() != expected) fail(where, "operator arity violated");
    for (const auto& op : e.operands) expression(op, where);
  }

  void sfc(const SfcBody& b, const std::string& where) {
    std::size_t initial = 0;
    std::set<std::string> names;
    for (const auto& s : b.steps) {
      if (s.initial) ++initial;
      if (!names.insert(s.name).second) fail(where, "duplicate step '" + s.name + "'");
      for (const auto& a : s.actions) {
        bool ok = currentPou_ && std::any_of(currentPou_->actions.begin(),
                                             currentPou_->actions.end(),
                                             [&](const NamedAction& na) {
                                               return na.name == a.actionRef;
                                             });
        if (!ok) fail(where, "step '" + s.name + "' references unknown action '" + a.actionRef + "'");
      }
    }
    if (initial != 1) fail(where, "SFC must have exactly one initial step");
    for (std::size_t i = 0; i < b.transitions.size(); ++i) {
      const auto& t = b.transitions[i];
      std::string tw = where + "/transitions/" + std::to_string(i);
      if (t.fromSteps.empty() || t.toSteps.empty()) fail(tw, "transition without endpoints");
      for (const auto* list : {&t.fromSteps, &t.toSteps}) {
        for (const auto& n : *list) {
          if (!names.count(n)) fail(tw, "transition references unknown step '" + n + "'");
        }
      }
      if (t.condition) expression(*t.condition, tw);
      else if (t.bodyRef.empty()) fail(tw, "transition without condition");
    }
  }

  void ld(const LdBody& b, const std::string& where) {
    for (std::size_t n = 0; n < b.networks.size(); ++n) {
      const auto& net = b.networks[n];
      std::string nw = where + "/networks/" + std::to_string(n);
      for (auto [from, to] : net.wiring) {
        if (from >= net.elements.size() || to >= net.elements.size()) {
          fail(nw, "wiring index out of range");
          continue;
        }
        if (std::holds_alternative<Coil>(net.elements[from])) {
          fail(nw, "coil has an outgoing wire");
        }
      }
    }
  }

  void fbd(const FbdBody& b, const std::string& where) {
    std::set<std::string> labels;
    for (const auto& net : b.networks) {
      if (net.label) labels.insert(*net.label);
    }
    for (std::size_t n = 0; n < b.networks.size(); ++n) {
      const auto& net = b.networks[n];
      std::string nw = where + "/networks/" + std::to_string(n);
      auto checkPort = [&](const PortRef& p, bool isSource) {
        if (p.kind == PortRef::Kind::Endpoint) {
          if (p.index >= net.endpoints.size()) fail(nw, "connection to missing endpoint");
          return;
        }
        if (p.index >= net.blocks.size()) {
          fail(nw, "connection to missing block");
          return;
        }
        if (p.port.empty()) return;
        const auto& ports = isSource ? net.blocks[p.index].outputPorts
                                     : net.blocks[p.index].inputPorts;
        if (std::find(ports.begin(), ports.end(), p.port) == ports.end()) {
          fail(nw, "connection to unknown port '" + p.port + "'");
        }
      };
      for (const auto& c : net.connections) {
        checkPort(c.source, true);
        checkPort(c.sink, false);
      }
      for (const auto& j : net.jumps) {
        if (!labels.count(j)) fail(nw, "jump target '" + j + "' does not resolve");
      }
      for (const auto& e : net.endpoints) expression(e, nw);
      if (net.nestedSt) statements(net.nestedSt->statements, nw + "/nestedSt");
    }
  }

  std::vector<std::string>& out_;
  const Pou* currentPou_ = nullptr;
};

}  // namespace

std::vector<std::string> checkInvariants(const Project& project) {
  std::vector<std::string> out;
  InvariantChecker(out).project(project);
  return out;
}

}  // namespace iecclone
