#include "iecclone/mutation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

#include "iecclone/compare.hpp"
#include <nlohmann/json.hpp>

namespace iecclone {

namespace {

constexpr std::string_view kOperatorNames[] = {
    "rename-variable",    "rename-pou",        "rename-step-or-action", "change-literal-value",
    "change-binary-operator", "add-statement", "remove-statement",      "add-variable",
    "remove-variable",    "add-sfc-step",      "remove-sfc-step",
};

}  // namespace

std::string_view toString(MutationCategory category) {
  return category == MutationCategory::T2 ? "T2" : "T3";
}

std::optional<MutationCategory> mutationCategoryFromString(std::string_view name) {
  if (name == "T2" || name == "t2") return MutationCategory::T2;
  if (name == "T3" || name == "t3") return MutationCategory::T3;
  return std::nullopt;
}

std::string_view toString(MutationOperator op) {
  return kOperatorNames[static_cast<std::size_t>(op)];
}

std::optional<MutationOperator> mutationOperatorFromString(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kOperatorNames); ++i) {
    if (kOperatorNames[i] == name) return static_cast<MutationOperator>(i);
  }
  return std::nullopt;
}

MutationCategory categoryOf(MutationOperator op) {
  return op <= MutationOperator::ChangeBinaryOperator ? MutationCategory::T2
                                                      : MutationCategory::T3;
}

const std::vector<MutationOperator>& operatorsOf(MutationCategory category) {
  using O = MutationOperator;
  static const std::vector<O> t2 = {O::RenameVariable, O::RenamePou, O::RenameStepOrAction,
                                    O::ChangeLiteralValue, O::ChangeBinaryOperator};
  static const std::vector<O> t3 = {O::AddStatement, O::RemoveStatement, O::AddVariable,
                                    O::RemoveVariable, O::AddSfcStep, O::RemoveSfcStep};
  return category == MutationCategory::T2 ? t2 : t3;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

// ---------------------------------------------------------------------------
// Randomness
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, n); the standard distributions are not portable across
  // library implementations.
  std::size_t below(std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % range);
  }

  bool coin() { return below(2) == 1; }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Model walking
// ---------------------------------------------------------------------------

template <class L, class F>
void walkStatements(L& list, const ArtifactPath& parent, const std::string& role, F& f) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    ArtifactPath path = parent.child(role, std::to_string(i));
    auto& s = list[i];
    f(s, path);
    walkStatements(s.children, path, "children", f);
    for (std::size_t k = 0; k < s.caseBranches.size(); ++k) {
      walkStatements(s.caseBranches[k].statements, path, "case" + std::to_string(k), f);
    }
    walkStatements(s.elseChildren, path, "else", f);
  }
}

template <class B, class F>
void walkBody(B& body, const ArtifactPath& owner, F& f) {
  const ArtifactPath path = owner.child("body", std::string(toString(body.language())));
  std::visit(
      [&](auto& content) {
        using T = std::remove_cvref_t<decltype(content)>;
        f(content, path);
        if constexpr (std::is_same_v<T, StBody>) {
          walkStatements(content.statements, path, "statements", f);
        } else if constexpr (std::is_same_v<T, SfcBody>) {
          for (auto& s : content.steps) f(s, path.child("steps", s.name));
          for (std::size_t i = 0; i < content.transitions.size(); ++i) {
            f(content.transitions[i], path.child("transitions", std::to_string(i)));
          }
        } else if constexpr (std::is_same_v<T, LdBody>) {
          for (std::size_t n = 0; n < content.networks.size(); ++n) {
            auto& net = content.networks[n];
            ArtifactPath np = path.child("networks", std::to_string(n));
            f(net, np);
            for (std::size_t i = 0; i < net.elements.size(); ++i) {
              std::visit([&](auto& e) { f(e, np.child("elements", std::to_string(i))); },
                         net.elements[i]);
            }
          }
        } else {
          for (std::size_t n = 0; n < content.networks.size(); ++n) {
            auto& net = content.networks[n];
            ArtifactPath np = path.child("networks", std::to_string(n));
            f(net, np);
            for (std::size_t i = 0; i < net.blocks.size(); ++i) {
              f(net.blocks[i], np.child("blocks", std::to_string(i)));
            }
            if (net.nestedSt) {
              ArtifactPath sp = np.child("nestedSt", "ST");
              f(*net.nestedSt, sp);
              walkStatements(net.nestedSt->statements, sp, "statements", f);
            }
          }
        }
      },
      body.content);
}

// Calls f(node, path) for the POU and every artifact below it.
template <class P, class F>
void walkPou(P& pou, const ArtifactPath& path, F& f) {
  f(pou, path);
  for (auto& v : pou.variables) f(v, path.child("variables", v.name));
  walkBody(pou.body, path, f);
  for (auto& a : pou.actions) {
    ArtifactPath ap = path.child("actions", a.name);
    f(a, ap);
    walkBody(a.body, ap, f);
  }
}

template <class Pr, class F>
void walkProject(Pr& project, F& f) {
  for (auto& pou : project.pous) walkPou(pou, ArtifactPath().child("pous", pou.name), f);
  for (auto& v : project.globalVariables) f(v, ArtifactPath().child("globals", v.name));
}

template <class T>
T& mutableAt(Project& project, const ArtifactPath& path) {
  auto ref = resolve(project, path);
  if (!ref || !std::holds_alternative<const T*>(*ref)) {
    throw MutationError("internal: no artifact of the expected type at '" + path.toString() + "'");
  }
  return const_cast<T&>(*std::get<const T*>(*ref));
}

std::vector<Statement>& statementList(Project& project, const ArtifactPath& container,
                                      const std::string& role) {
  auto ref = resolve(project, container);
  if (!ref) throw MutationError("internal: unresolved list container '" + container.toString() + "'");
  if (auto* st = std::get_if<const StBody*>(&*ref)) return const_cast<StBody*>(*st)->statements;
  auto* s = const_cast<Statement*>(std::get<const Statement*>(*ref));
  if (role == "children") return s->children;
  if (role == "else") return s->elseChildren;
  return s->caseBranches.at(std::stoul(role.substr(4))).statements;
}

// ---------------------------------------------------------------------------
// Identifier handling
// ---------------------------------------------------------------------------

bool identStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool identChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Rewrites identifier tokens of a reference equal to `from`; member names
// after '.' are left alone. With `to` null only reports a match.
bool renameTokens(std::string& text, std::string_view from, const std::string* to) {
  bool hit = false;
  std::string out;
  std::size_t i = 0;
  char prev = 0;
  while (i < text.size()) {
    if (identStart(text[i]) && !(i > 0 && identChar(text[i - 1]))) {
      std::size_t j = i;
      while (j < text.size() && identChar(text[j])) ++j;
      std::string_view tok(text.data() + i, j - i);
      bool member = prev == '.';
      if (!member && tok == from) {
        hit = true;
        out += to ? *to : std::string(tok);
      } else {
        out += tok;
      }
      prev = text[j - 1];
      i = j;
      continue;
    }
    if (!std::isspace(static_cast<unsigned char>(text[i]))) prev = text[i];
    out += text[i++];
  }
  if (hit && to) text = std::move(out);
  return hit;
}

bool mentions(const std::string& text, std::string_view name) {
  std::string copy = text;
  return renameTokens(copy, name, nullptr);
}

bool renameText(std::string& text, std::string_view from, const std::string& to) {
  return renameTokens(text, from, &to);
}

// Variable references inside an expression.
bool exprMentionsVar(const Expression& e, std::string_view name) {
  if (e.kind == Expression::Kind::VarRef && mentions(e.text, name)) return true;
  return std::any_of(e.operands.begin(), e.operands.end(),
                     [&](const Expression& o) { return exprMentionsVar(o, name); });
}

bool exprRenameVar(Expression& e, std::string_view from, const std::string& to) {
  bool hit = e.kind == Expression::Kind::VarRef && renameText(e.text, from, to);
  for (auto& o : e.operands) hit = exprRenameVar(o, from, to) || hit;
  return hit;
}

bool exprMentionsCall(const Expression& e, std::string_view name) {
  if (e.kind == Expression::Kind::FuncCall && e.text == name) return true;
  return std::any_of(e.operands.begin(), e.operands.end(),
                     [&](const Expression& o) { return exprMentionsCall(o, name); });
}

bool exprRenameCall(Expression& e, std::string_view from, const std::string& to) {
  bool hit = false;
  if (e.kind == Expression::Kind::FuncCall && e.text == from) {
    e.text = to;
    hit = true;
  }
  for (auto& o : e.operands) hit = exprRenameCall(o, from, to) || hit;
  return hit;
}

std::vector<Expression*> ownExpressionsMut(Statement& s) {
  std::vector<Expression*> out;
  for (auto* e : {&s.condition, &s.value, &s.from, &s.to, &s.by}) {
    if (*e) out.push_back(&**e);
  }
  for (auto& a : s.args) out.push_back(&a.value);
  return out;
}

// Whether an artifact refers to variable `name` by its own content; nested
// statements are separate artifacts.
struct VarMention {
  std::string_view name;

  bool operator()(const Statement& s) const {
    if (mentions(s.target, name) || mentions(s.callee, name)) return true;
    for (const auto* e : ownExpressions(s)) {
      if (exprMentionsVar(*e, name)) return true;
    }
    return false;
  }
  bool operator()(const Transition& t) const {
    return t.condition && exprMentionsVar(*t.condition, name);
  }
  bool operator()(const Contact& c) const { return mentions(c.variable, name); }
  bool operator()(const Coil& c) const { return mentions(c.variable, name); }
  bool operator()(const FbdBlock& b) const { return b.instanceName && *b.instanceName == name; }
  bool operator()(const FbdNetwork& n) const {
    return std::any_of(n.endpoints.begin(), n.endpoints.end(),
                       [&](const Expression& e) { return exprMentionsVar(e, name); });
  }
};

struct VarRename {
  std::string_view from;
  std::string to;

  bool operator()(Statement& s) const {
    bool hit = renameText(s.target, from, to);
    hit = renameText(s.callee, from, to) || hit;
    for (auto* e : ownExpressionsMut(s)) hit = exprRenameVar(*e, from, to) || hit;
    return hit;
  }
  bool operator()(Transition& t) const { return t.condition && exprRenameVar(*t.condition, from, to); }
  bool operator()(Contact& c) const { return renameText(c.variable, from, to); }
  bool operator()(Coil& c) const { return renameText(c.variable, from, to); }
  bool operator()(FbdBlock& b) const {
    if (!b.instanceName || *b.instanceName != from) return false;
    b.instanceName = to;
    return true;
  }
  bool operator()(FbdNetwork& n) const {
    bool hit = false;
    for (auto& e : n.endpoints) hit = exprRenameVar(e, from, to) || hit;
    return hit;
  }
};

template <class T>
constexpr bool kReferenceSite =
    std::is_same_v<T, Statement> || std::is_same_v<T, Transition> ||
    std::is_same_v<T, Contact> || std::is_same_v<T, Coil> || std::is_same_v<T, FbdBlock> ||
    std::is_same_v<T, FbdNetwork>;

void collectIdentifiers(const Project& project, std::set<std::string>& out) {
  auto upper = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
  };
  auto addTokens = [&](const std::string& text) {
    std::size_t i = 0;
    while (i < text.size()) {
      if (identStart(text[i])) {
        std::size_t j = i;
        while (j < text.size() && identChar(text[j])) ++j;
        out.insert(upper(text.substr(i, j - i)));
        i = j;
      } else {
        ++i;
      }
    }
  };
  std::function<void(const Expression&)> expr = [&](const Expression& e) {
    if (e.kind == Expression::Kind::VarRef || e.kind == Expression::Kind::FuncCall) addTokens(e.text);
    for (const auto& o : e.operands) expr(o);
  };
  addTokens(project.name);
  auto visit = [&](const auto& node, const ArtifactPath&) {
    using T = std::remove_cvref_t<decltype(node)>;
    if constexpr (std::is_same_v<T, Pou> || std::is_same_v<T, NamedAction> ||
                  std::is_same_v<T, Step>) {
      addTokens(node.name);
    } else if constexpr (std::is_same_v<T, VariableDecl>) {
      addTokens(node.name);
      addTokens(node.dataType);
    } else if constexpr (std::is_same_v<T, Statement>) {
      addTokens(node.target);
      addTokens(node.callee);
      for (const auto& a : node.args) addTokens(a.name);
      for (const auto* e : ownExpressions(node)) expr(*e);
    } else if constexpr (std::is_same_v<T, Transition>) {
      if (node.condition) expr(*node.condition);
      addTokens(node.bodyRef);
    } else if constexpr (std::is_same_v<T, Contact> || std::is_same_v<T, Coil>) {
      addTokens(node.variable);
    } else if constexpr (std::is_same_v<T, FbdBlock>) {
      addTokens(node.typeName);
      if (node.instanceName) addTokens(*node.instanceName);
    } else if constexpr (std::is_same_v<T, FbdNetwork>) {
      for (const auto& e : node.endpoints) expr(e);
      for (const auto& j : node.jumps) addTokens(j);
      if (node.label) addTokens(*node.label);
    } else if constexpr (std::is_same_v<T, LdNetwork>) {
      if (node.label) addTokens(*node.label);
    }
  };
  walkProject(project, visit);
}

// ---------------------------------------------------------------------------
// Literals and operators
// ---------------------------------------------------------------------------

enum class ValueKind { Bool, Int, Real, Time, Other };

ValueKind valueKind(std::string_view type) {
  static const std::set<std::string_view> ints = {"INT",  "SINT",  "DINT", "LINT", "UINT",
                                                  "USINT", "UDINT", "ULINT", "BYTE", "WORD",
                                                  "DWORD", "LWORD"};
  if (type == "BOOL") return ValueKind::Bool;
  if (ints.count(type)) return ValueKind::Int;
  if (type == "REAL" || type == "LREAL") return ValueKind::Real;
  if (type == "TIME") return ValueKind::Time;
  return ValueKind::Other;
}

std::string formatReal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

Expression randomLiteral(ValueKind kind, const std::string& type, Rng& rng) {
  switch (kind) {
    case ValueKind::Bool: return Expression::literal(rng.coin() ? "TRUE" : "FALSE", "BOOL");
    case ValueKind::Int: return Expression::literal(std::to_string(rng.below(100)), type);
    case ValueKind::Real: return Expression::literal(formatReal(rng.below(100) + 0.5), type);
    case ValueKind::Time:
      return Expression::literal("T#" + std::to_string(1 + rng.below(60)) + "S", "TIME");
    case ValueKind::Other: break;
  }
  return Expression::literal("0", "INT");
}

bool mutableLiteral(const Expression& e) {
  return e.kind == Expression::Kind::Literal && valueKind(e.literalType) != ValueKind::Other;
}

std::string changedLiteral(const Expression& lit, Rng& rng) {
  const std::string& text = lit.text;
  const std::size_t delta = 1 + rng.below(9);
  switch (valueKind(lit.literalType)) {
    case ValueKind::Bool: return text == "TRUE" ? "FALSE" : "TRUE";
    case ValueKind::Int: {
      long long v = 0;
      try {
        v = std::stoll(text);
      } catch (const std::exception&) {
        return text == "0" ? "1" : "0";
      }
      long long next = rng.coin() && v >= static_cast<long long>(delta)
                           ? v - static_cast<long long>(delta)
                           : v + static_cast<long long>(delta);
      return std::to_string(next);
    }
    case ValueKind::Real: {
      double v = 0.0;
      try {
        v = std::stod(text);
      } catch (const std::exception&) {
      }
      std::string out = formatReal(v + 0.5 * static_cast<double>(delta));
      return out == text ? formatReal(v + 1000.0) : out;
    }
    case ValueKind::Time: {
      std::string out = "T#" + std::to_string(delta * 100) + "MS";
      return out == text ? "T#" + std::to_string(delta * 100 + 1) + "MS" : out;
    }
    case ValueKind::Other: break;
  }
  return text;
}

int operatorClass(BinaryOperator op) {
  using B = BinaryOperator;
  switch (op) {
    case B::And: case B::Or: case B::Xor: return 0;
    case B::Eq: case B::Ne: case B::Lt: case B::Le: case B::Gt: case B::Ge: return 1;
    case B::Add: case B::Sub: case B::Mul: case B::Div: return 2;
    case B::Mod: case B::Pow: return -1;
  }
  return -1;
}

const std::vector<BinaryOperator>& classMembers(int cls) {
  using B = BinaryOperator;
  static const std::vector<std::vector<B>> members = {
      {B::And, B::Or, B::Xor},
      {B::Eq, B::Ne, B::Lt, B::Le, B::Gt, B::Ge},
      {B::Add, B::Sub, B::Mul, B::Div},
  };
  return members.at(static_cast<std::size_t>(cls));
}

// Pre-order enumeration of the nodes matching `pred`.
template <class E, class Pred>
void collectNodes(E& e, Pred& pred, std::vector<E*>& out) {
  if (pred(e)) out.push_back(&e);
  for (auto& o : e.operands) collectNodes(o, pred, out);
}

template <class Pred>
std::vector<const Expression*> nodesOf(const ArtifactRef& element, Pred pred) {
  std::vector<const Expression*> out;
  if (auto* s = std::get_if<const Statement*>(&element)) {
    for (const auto* e : ownExpressions(**s)) collectNodes(*e, pred, out);
  } else if (auto* t = std::get_if<const Transition*>(&element)) {
    if ((*t)->condition) collectNodes(*(*t)->condition, pred, out);
  }
  return out;
}

bool isMutableBinary(const Expression& e) {
  return e.kind == Expression::Kind::Binary && operatorClass(e.binaryOp) >= 0;
}

// ---------------------------------------------------------------------------
// Edits: index and key changes of one mutation, used to translate paths
// between successive models.
// ---------------------------------------------------------------------------

struct Edit {
  enum class Kind { Insert, Remove, InsertNamed, RemoveNamed, Rekey };
  Kind kind;
  ArtifactPath parent;
  std::string role;
  std::string key;     // index for Insert/Remove, name otherwise
  std::string newKey;  // Rekey only
};

std::optional<ArtifactPath> translate(const ArtifactPath& path, const Edit& edit, bool forward) {
  const std::size_t m = edit.parent.size();
  if (path.size() <= m || !edit.parent.isPrefixOf(path)) return path;
  const PathSegment& seg = path.segments()[m];
  if (seg.role != edit.role) return path;
  ArtifactPath out = path;
  std::string& key = out.segments()[m].key;
  using K = Edit::Kind;
  switch (edit.kind) {
    case K::Insert:
    case K::Remove: {
      const std::size_t j = std::stoul(seg.key);
      const std::size_t k = std::stoul(edit.key);
      const bool grows = (edit.kind == K::Insert) == forward;
      if (grows) {
        if (j >= k) key = std::to_string(j + 1);
      } else {
        if (j == k) return std::nullopt;
        if (j > k) key = std::to_string(j - 1);
      }
      return out;
    }
    case K::InsertNamed:
    case K::RemoveNamed: {
      const bool vanishes = (edit.kind == K::RemoveNamed) == forward;
      if (vanishes && seg.key == edit.key) return std::nullopt;
      return out;
    }
    case K::Rekey: {
      const std::string& from = forward ? edit.key : edit.newKey;
      const std::string& to = forward ? edit.newKey : edit.key;
      if (seg.key == from) key = to;
      return out;
    }
  }
  return out;
}

std::optional<ArtifactPath> forwardAll(std::optional<ArtifactPath> path,
                                       const std::vector<Edit>& edits) {
  for (const auto& e : edits) {
    if (!path) break;
    path = translate(*path, e, true);
  }
  return path;
}

std::optional<ArtifactPath> backwardAll(std::optional<ArtifactPath> path,
                                        const std::vector<Edit>& edits) {
  for (auto it = edits.rbegin(); it != edits.rend(); ++it) {
    if (!path) break;
    path = translate(*path, *it, false);
  }
  return path;
}

// Record of one mutation step, relative to the model before and after it.
// Changed artifacts carry only their origin; their new path is the origin
// translated through the step's edits.
struct LocalRecord {
  std::optional<ArtifactPath> origin;
  std::optional<ArtifactPath> mutant;
  bool changed = false;
};

struct StepResult {
  std::vector<LocalRecord> records;
  std::vector<Edit> edits;
};

// ---------------------------------------------------------------------------
// Sites
// ---------------------------------------------------------------------------

struct Site {
  MutationOperator op;
  ArtifactPath path;     // primary artifact, or list container for add-statement
  std::string role;      // statement list role for add-statement
  std::size_t index = 0;  // node ordinal for literal/operator changes
  std::string pou;       // owning POU
};

struct VariableScope {
  ArtifactPath declaration;
  std::string name;
  std::vector<std::string> pous;  // POUs whose references resolve to it
};

std::vector<VariableScope> variableScopes(const Project& p) {
  std::vector<VariableScope> out;
  for (const auto& pou : p.pous) {
    for (const auto& v : pou.variables) {
      out.push_back({ArtifactPath().child("pous", pou.name).child("variables", v.name), v.name,
                     {pou.name}});
    }
  }
  for (const auto& g : p.globalVariables) {
    VariableScope s{ArtifactPath().child("globals", g.name), g.name, {}};
    for (const auto& pou : p.pous) {
      bool shadowed = std::any_of(pou.variables.begin(), pou.variables.end(),
                                  [&](const VariableDecl& v) { return v.name == g.name; });
      if (!shadowed) s.pous.push_back(pou.name);
    }
    out.push_back(std::move(s));
  }
  return out;
}

const Pou* findPou(const Project& p, const std::string& name) {
  for (const auto& pou : p.pous) {
    if (pou.name == name) return &pou;
  }
  return nullptr;
}

struct ReferenceSite {
  ArtifactPath path;
  bool statement;
};

std::vector<ReferenceSite> variableReferences(const Project& p, const VariableScope& scope) {
  std::vector<ReferenceSite> out;
  VarMention mention{scope.name};
  auto visit = [&](const auto& node, const ArtifactPath& path) {
    using T = std::remove_cvref_t<decltype(node)>;
    if constexpr (kReferenceSite<T>) {
      if (mention(node)) out.push_back({path, std::is_same_v<T, Statement>});
    }
  };
  for (const auto& name : scope.pous) {
    const Pou* pou = findPou(p, name);
    walkPou(*pou, ArtifactPath().child("pous", name), visit);
  }
  return out;
}

bool statementRole(const std::string& role) {
  return role == "statements" || role == "children" || role == "else" || role.rfind("case", 0) == 0;
}

// Statements compared against each other with the one at `parent`: all
// direct child statements of a body or of a compound statement.
std::vector<const Statement*> poolOf(const Project& p, const ArtifactPath& parent) {
  std::vector<const Statement*> out;
  auto ref = resolve(p, parent);
  if (!ref) return out;
  if (auto* st = std::get_if<const StBody*>(&*ref)) {
    for (const auto& s : (*st)->statements) out.push_back(&s);
  } else if (auto* s = std::get_if<const Statement*>(&*ref)) {
    for (const auto& c : (*s)->children) out.push_back(&c);
    for (const auto& b : (*s)->caseBranches) {
      for (const auto& c : b.statements) out.push_back(&c);
    }
    for (const auto& c : (*s)->elseChildren) out.push_back(&c);
  }
  return out;
}

const Statement* statementAt(const Project& p, const ArtifactPath& path) {
  auto ref = resolve(p, path);
  auto* s = ref ? std::get_if<const Statement*>(&*ref) : nullptr;
  return s ? *s : nullptr;
}

ArtifactPath parentOf(const ArtifactPath& path) {
  return ArtifactPath(std::vector<PathSegment>(path.segments().begin(), path.segments().end() - 1));
}

bool hasEqualSibling(const Project& p, const ArtifactPath& path,
                     const std::set<const Statement*>& alsoRemoved = {}) {
  const Statement* self = statementAt(p, path);
  for (const Statement* other : poolOf(p, parentOf(path))) {
    if (other == self || alsoRemoved.count(other)) continue;
    if (*other == *self) return true;
  }
  return false;
}

// True when the statement at `path`, or a statement enclosing it, has an
// identical sibling; the matching cannot tell such twins apart.
bool underTwin(const Project& p, const ArtifactPath& path) {
  const auto& segs = path.segments();
  for (std::size_t n = 1; n <= segs.size(); ++n) {
    if (!statementRole(segs[n - 1].role)) continue;
    ArtifactPath prefix(std::vector<PathSegment>(segs.begin(), segs.begin() + n));
    if (statementAt(p, prefix) && hasEqualSibling(p, prefix)) return true;
  }
  return false;
}

// Removing every statement of a body would leave a pair with nothing to
// compare, which the matching drops as dissimilar.
bool emptiesBody(const Project& p, const ArtifactPath& parent, std::size_t removed) {
  auto ref = resolve(p, parent);
  auto* st = ref ? std::get_if<const StBody*>(&*ref) : nullptr;
  return st && (*st)->statements.size() <= removed;
}

// Removal plan for a variable: its declaration plus the outermost
// statements referring to it, or nullopt when a reference is not a
// statement or a removed statement would leave an identical sibling.
std::optional<std::vector<ArtifactPath>> variableRemovalPlan(const Project& p,
                                                            const VariableScope& scope) {
  std::vector<ArtifactPath> statements;
  for (const auto& r : variableReferences(p, scope)) {
    if (!r.statement) return std::nullopt;
    statements.push_back(r.path);
  }
  std::vector<ArtifactPath> outermost;
  for (const auto& s : statements) {
    bool nested = std::any_of(statements.begin(), statements.end(), [&](const ArtifactPath& o) {
      return o.size() < s.size() && o.isPrefixOf(s);
    });
    if (!nested) outermost.push_back(s);
  }
  std::map<std::string, std::set<const Statement*>> removedPerParent;
  for (const auto& s : outermost) {
    removedPerParent[parentOf(s).toString()].insert(statementAt(p, s));
  }
  for (const auto& s : outermost) {
    const ArtifactPath parent = parentOf(s);
    const auto& removed = removedPerParent[parent.toString()];
    if (hasEqualSibling(p, s, removed) || underTwin(p, parent) ||
        emptiesBody(p, parent, removed.size())) {
      return std::nullopt;
    }
  }
  return outermost;
}

bool assignable(const VariableDecl& v) {
  return v.section != VarSection::Input && valueKind(v.dataType) != ValueKind::Other;
}

std::vector<const VariableDecl*> assignableVariables(const Project& p, const Pou& pou) {
  std::vector<const VariableDecl*> out;
  for (const auto& v : pou.variables) {
    if (assignable(v)) out.push_back(&v);
  }
  for (const auto& g : p.globalVariables) {
    bool shadowed = std::any_of(pou.variables.begin(), pou.variables.end(),
                                [&](const VariableDecl& v) { return v.name == g.name; });
    if (!shadowed && assignable(g)) out.push_back(&g);
  }
  return out;
}

struct SfcSite {
  ArtifactPath body;
  const SfcBody* sfc;
};

std::vector<SfcSite> sfcBodies(const Project& p) {
  std::vector<SfcSite> out;
  auto visit = [&](const auto& node, const ArtifactPath& path) {
    if constexpr (std::is_same_v<std::remove_cvref_t<decltype(node)>, SfcBody>) {
      out.push_back({path, &node});
    }
  };
  walkProject(p, visit);
  return out;
}

bool sameCondition(const Transition& a, const Transition& b) {
  return a.condition == b.condition && a.bodyRef == b.bodyRef;
}

// For a removable step: (incoming, outgoing) transition indices.
std::optional<std::pair<std::size_t, std::size_t>> stepBypass(const SfcBody& sfc,
                                                              const Step& step) {
  if (step.initial) return std::nullopt;
  std::vector<std::size_t> in, out;
  for (std::size_t i = 0; i < sfc.transitions.size(); ++i) {
    const auto& t = sfc.transitions[i];
    bool to = std::count(t.toSteps.begin(), t.toSteps.end(), step.name) > 0;
    bool from = std::count(t.fromSteps.begin(), t.fromSteps.end(), step.name) > 0;
    if (to) in.push_back(i);
    if (from) out.push_back(i);
  }
  if (in.size() != 1 || out.size() != 1 || in[0] == out[0]) return std::nullopt;
  const auto& ti = sfc.transitions[in[0]];
  const auto& to = sfc.transitions[out[0]];
  if (ti.toSteps.size() != 1 || to.fromSteps.size() != 1) return std::nullopt;
  if (sameCondition(ti, to)) return std::nullopt;
  return std::make_pair(in[0], out[0]);
}

// A site conflicts with earlier mutations of the same mutant when it is an
// already recorded artifact, or when removing it would take a recorded
// artifact with it.
bool conflicts(const Site& site, const std::vector<ArtifactPath>& touched) {
  using O = MutationOperator;
  const bool removes = site.op == O::RemoveStatement || site.op == O::RemoveSfcStep ||
                       site.op == O::RemoveVariable;
  for (const auto& t : touched) {
    if (t == site.path) return true;
    if (removes && site.path.isPrefixOf(t)) return true;
  }
  return false;
}

std::vector<Site> enumerateSites(const Project& p, MutationOperator op) {
  using O = MutationOperator;
  std::vector<Site> out;
  switch (op) {
    case O::RenameVariable:
      for (const auto& s : variableScopes(p)) out.push_back({op, s.declaration, "", 0, ""});
      break;
    case O::RenamePou:
      for (const auto& pou : p.pous) {
        out.push_back({op, ArtifactPath().child("pous", pou.name), "", 0, pou.name});
      }
      break;
    case O::RenameStepOrAction: {
      auto visit = [&](const auto& node, const ArtifactPath& path) {
        using T = std::remove_cvref_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Step> || std::is_same_v<T, NamedAction>) {
          out.push_back({op, path, "", 0, path.segments()[0].key});
        }
      };
      walkProject(p, visit);
      break;
    }
    case O::ChangeLiteralValue:
    case O::ChangeBinaryOperator: {
      auto visit = [&](const auto& node, const ArtifactPath& path) {
        using T = std::remove_cvref_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Statement> || std::is_same_v<T, Transition>) {
          if (underTwin(p, path)) return;
          std::size_t n = op == O::ChangeLiteralValue
                              ? nodesOf(ArtifactRef(&node), mutableLiteral).size()
                              : nodesOf(ArtifactRef(&node), isMutableBinary).size();
          for (std::size_t k = 0; k < n; ++k) out.push_back({op, path, "", k, path.segments()[0].key});
        }
      };
      walkProject(p, visit);
      break;
    }
    case O::AddStatement:
      for (const auto& pou : p.pous) {
        if (assignableVariables(p, pou).empty()) continue;
        auto visit = [&](const auto& node, const ArtifactPath& path) {
          using T = std::remove_cvref_t<decltype(node)>;
          if constexpr (std::is_same_v<T, StBody>) {
            out.push_back({op, path, "statements", 0, pou.name});
          } else if constexpr (std::is_same_v<T, Statement>) {
            if (underTwin(p, path)) return;
            switch (node.kind) {
              case StatementKind::If:
                out.push_back({op, path, "children", 0, pou.name});
                out.push_back({op, path, "else", 0, pou.name});
                break;
              case StatementKind::For:
              case StatementKind::While:
                out.push_back({op, path, "children", 0, pou.name});
                break;
              case StatementKind::Case:
                for (std::size_t k = 0; k < node.caseBranches.size(); ++k) {
                  out.push_back({op, path, "case" + std::to_string(k), 0, pou.name});
                }
                out.push_back({op, path, "else", 0, pou.name});
                break;
              default: break;
            }
          }
        };
        walkPou(pou, ArtifactPath().child("pous", pou.name), visit);
      }
      break;
    case O::RemoveStatement: {
      auto visit = [&](const auto& node, const ArtifactPath& path) {
        using T = std::remove_cvref_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Statement>) {
          if (!underTwin(p, path) && !emptiesBody(p, parentOf(path), 1)) {
            out.push_back({op, path, "", 0, path.segments()[0].key});
          }
        }
      };
      walkProject(p, visit);
      break;
    }
    case O::AddVariable:
      for (const auto& pou : p.pous) {
        out.push_back({op, ArtifactPath().child("pous", pou.name), "", 0, pou.name});
      }
      break;
    case O::RemoveVariable:
      for (const auto& s : variableScopes(p)) {
        if (variableRemovalPlan(p, s)) out.push_back({op, s.declaration, "", 0, ""});
      }
      break;
    case O::AddSfcStep:
      for (const auto& b : sfcBodies(p)) {
        for (std::size_t i = 0; i < b.sfc->transitions.size(); ++i) {
          out.push_back({op, b.body.child("transitions", std::to_string(i)), "", i,
                         b.body.segments()[0].key});
        }
      }
      break;
    case O::RemoveSfcStep:
      for (const auto& b : sfcBodies(p)) {
        for (const auto& s : b.sfc->steps) {
          if (stepBypass(*b.sfc, s)) {
            out.push_back({op, b.body.child("steps", s.name), "", 0, b.body.segments()[0].key});
          }
        }
      }
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

StepResult applyRenameVariable(Project& p, const ArtifactPath& declaration,
                               const std::string& newName) {
  StepResult r;
  VariableScope scope;
  bool found = false;
  for (auto& s : variableScopes(p)) {
    if (s.declaration == declaration) {
      scope = std::move(s);
      found = true;
      break;
    }
  }
  if (!found) throw MutationError("no variable declared at '" + declaration.toString() + "'");
  for (const auto& ref : variableReferences(p, scope)) r.records.push_back({ref.path, {}, true});
  VarRename rename{scope.name, newName};
  auto visit = [&](auto& node, const ArtifactPath&) {
    using T = std::remove_cvref_t<decltype(node)>;
    if constexpr (kReferenceSite<T>) rename(node);
  };
  for (const auto& name : scope.pous) {
    Pou& pou = const_cast<Pou&>(*findPou(p, name));
    walkPou(pou, ArtifactPath().child("pous", name), visit);
  }
  mutableAt<VariableDecl>(p, declaration).name = newName;
  r.records.insert(r.records.begin(), LocalRecord{declaration, {}, true});
  ArtifactPath parent = parentOf(declaration);
  r.edits.push_back({Edit::Kind::Rekey, parent, declaration.segments().back().role, scope.name, newName});
  return r;
}

StepResult applyRenamePou(Project& p, const std::string& name, const std::string& newName) {
  StepResult r;
  r.records.push_back({ArtifactPath().child("pous", name), {}, true});
  auto visit = [&](auto& node, const ArtifactPath& path) {
    using T = std::remove_cvref_t<decltype(node)>;
    bool hit = false;
    if constexpr (std::is_same_v<T, VariableDecl>) {
      hit = renameText(node.dataType, name, newName);
    } else if constexpr (std::is_same_v<T, Statement>) {
      hit = renameText(node.callee, name, newName);
      for (auto* e : ownExpressionsMut(node)) hit = exprRenameCall(*e, name, newName) || hit;
    } else if constexpr (std::is_same_v<T, Transition>) {
      hit = node.condition && exprRenameCall(*node.condition, name, newName);
    } else if constexpr (std::is_same_v<T, FbdBlock>) {
      if (node.typeName == name) {
        node.typeName = newName;
        hit = true;
      }
    } else if constexpr (std::is_same_v<T, FbdNetwork>) {
      for (auto& e : node.endpoints) hit = exprRenameCall(e, name, newName) || hit;
    }
    if (hit) r.records.push_back({path, {}, true});
  };
  walkProject(p, visit);
  for (auto& pou : p.pous) {
    if (pou.name == name) pou.name = newName;
  }
  for (auto& [key, value] : p.metadata) {
    if (key != "pouInstance") continue;
    auto colon = value.find(':');
    if (colon != std::string::npos && value.substr(colon + 1) == name) {
      value = value.substr(0, colon + 1) + newName;
    }
  }
  r.edits.push_back({Edit::Kind::Rekey, ArtifactPath(), "pous", name, newName});
  return r;
}

StepResult applyRenameStepOrAction(Project& p, const ArtifactPath& path, const std::string& newName) {
  StepResult r;
  const std::string old = path.segments().back().key;
  const ArtifactPath parent = parentOf(path);
  r.records.push_back({path, {}, true});
  if (path.segments().back().role == "steps") {
    auto& sfc = mutableAt<SfcBody>(p, parent);
    for (auto& s : sfc.steps) {
      if (s.name == old) s.name = newName;
    }
    for (std::size_t i = 0; i < sfc.transitions.size(); ++i) {
      auto& t = sfc.transitions[i];
      bool hit = false;
      for (auto* list : {&t.fromSteps, &t.toSteps}) {
        for (auto& n : *list) {
          if (n == old) {
            n = newName;
            hit = true;
          }
        }
      }
      if (hit) r.records.push_back({parent.child("transitions", std::to_string(i)), {}, true});
    }
  } else {
    Pou& pou = mutableAt<Pou>(p, parent);
    auto visit = [&](auto& node, const ArtifactPath& at) {
      if constexpr (std::is_same_v<std::remove_cvref_t<decltype(node)>, Step>) {
        bool hit = false;
        for (auto& a : node.actions) {
          if (a.actionRef == old) {
            a.actionRef = newName;
            hit = true;
          }
        }
        if (hit) r.records.push_back({at, {}, true});
      }
    };
    walkPou(pou, parent, visit);
    for (auto& a : pou.actions) {
      if (a.name == old) a.name = newName;
    }
  }
  r.edits.push_back({Edit::Kind::Rekey, parent, path.segments().back().role, old, newName});
  return r;
}

template <class Pred>
Expression& nthNode(Project& p, const ArtifactPath& element, std::size_t k, Pred pred) {
  auto nodes = nodesOf(*resolve(p, element), pred);
  return const_cast<Expression&>(*nodes.at(k));
}

StepResult applyChangeLiteral(Project& p, const Site& site, Rng& rng) {
  Expression& lit = nthNode(p, site.path, site.index, mutableLiteral);
  lit.text = changedLiteral(lit, rng);
  return {{{site.path, {}, true}}, {}};
}

StepResult applyChangeOperator(Project& p, const Site& site, Rng& rng) {
  Expression& e = nthNode(p, site.path, site.index, isMutableBinary);
  std::vector<BinaryOperator> others;
  for (auto op : classMembers(operatorClass(e.binaryOp))) {
    if (op != e.binaryOp) others.push_back(op);
  }
  e.binaryOp = others[rng.below(others.size())];
  return {{{site.path, {}, true}}, {}};
}

// k-th value of a deterministic sequence of distinct literals.
Expression nthLiteral(ValueKind kind, const std::string& type, std::size_t k) {
  switch (kind) {
    case ValueKind::Bool: return Expression::literal(k % 2 ? "FALSE" : "TRUE", "BOOL");
    case ValueKind::Real: return Expression::literal(formatReal(100.5 + static_cast<double>(k)), type);
    case ValueKind::Time: return Expression::literal("T#" + std::to_string(100 + k) + "S", "TIME");
    default: return Expression::literal(std::to_string(100 + k), type);
  }
}

StepResult applyAddStatement(Project& p, const Site& site, Rng& rng) {
  const Pou* pou = findPou(p, site.pou);
  auto vars = assignableVariables(p, *pou);
  auto& list = statementList(p, site.path, site.role);
  const std::size_t pos = rng.below(list.size() + 1);
  const std::size_t first = rng.below(vars.size());
  const auto pool = poolOf(p, site.path);
  auto isNew = [&](const Statement& s) {
    return std::none_of(pool.begin(), pool.end(), [&](const Statement* o) { return *o == s; });
  };
  Statement s;
  s.kind = StatementKind::Assignment;
  bool found = false;
  for (std::size_t a = 0; a < vars.size() && !found; ++a) {
    const VariableDecl& v = *vars[(first + a) % vars.size()];
    const ValueKind kind = valueKind(v.dataType);
    s.target = v.name;
    s.value = randomLiteral(kind, v.dataType, rng);
    found = isNew(s);
    const std::size_t tries = kind == ValueKind::Bool ? 2 : pool.size() + 1;
    for (std::size_t k = 0; k < tries && !found; ++k) {
      s.value = nthLiteral(kind, v.dataType, k);
      found = isNew(s);
    }
  }
  if (!found) throw MutationError("internal: could not build a distinct statement");
  list.insert(list.begin() + static_cast<std::ptrdiff_t>(pos), std::move(s));
  StepResult r;
  r.records.push_back({{}, site.path.child(site.role, std::to_string(pos)), false});
  r.edits.push_back({Edit::Kind::Insert, site.path, site.role, std::to_string(pos), ""});
  return r;
}

StepResult removeStatements(Project& p, std::vector<ArtifactPath> paths) {
  StepResult r;
  // Later paths first so that earlier ones stay valid.
  std::sort(paths.begin(), paths.end(), [](const ArtifactPath& a, const ArtifactPath& b) {
    return b < a;
  });
  for (const auto& path : paths) {
    const ArtifactPath parent = parentOf(path);
    const PathSegment& last = path.segments().back();
    auto& list = statementList(p, parent, last.role);
    list.erase(list.begin() + static_cast<std::ptrdiff_t>(std::stoul(last.key)));
    r.records.push_back({path, {}, false});
    r.edits.push_back({Edit::Kind::Remove, parent, last.role, last.key, ""});
  }
  return r;
}

StepResult applyAddVariable(Project& p, const Site& site, Rng& rng) {
  static const char* kTypes[] = {"BOOL", "INT", "REAL", "TIME"};
  VariableDecl v;
  v.name = freshName(p, "VAR");
  v.dataType = kTypes[rng.below(std::size(kTypes))];
  v.section = VarSection::Local;
  Pou& pou = mutableAt<Pou>(p, site.path);
  const std::size_t pos = rng.below(pou.variables.size() + 1);
  pou.variables.insert(pou.variables.begin() + static_cast<std::ptrdiff_t>(pos), v);
  StepResult r;
  r.records.push_back({{}, site.path.child("variables", v.name), false});
  r.edits.push_back({Edit::Kind::InsertNamed, site.path, "variables", v.name, ""});
  return r;
}

StepResult applyRemoveVariable(Project& p, const Site& site) {
  VariableScope scope;
  for (auto& s : variableScopes(p)) {
    if (s.declaration == site.path) scope = std::move(s);
  }
  auto plan = variableRemovalPlan(p, scope);
  StepResult r = removeStatements(p, *plan);
  const ArtifactPath parent = parentOf(site.path);
  const std::string role = site.path.segments().back().role;
  auto& vars = role == "globals" ? p.globalVariables : mutableAt<Pou>(p, parent).variables;
  vars.erase(std::find_if(vars.begin(), vars.end(),
                          [&](const VariableDecl& v) { return v.name == scope.name; }));
  r.records.insert(r.records.begin(), LocalRecord{site.path, {}, false});
  r.edits.push_back({Edit::Kind::RemoveNamed, parent, role, scope.name, ""});
  return r;
}

StepResult applyAddSfcStep(Project& p, const Site& site) {
  const ArtifactPath body = parentOf(site.path);
  auto& sfc = mutableAt<SfcBody>(p, body);
  Step step;
  step.name = freshName(p, "STEP");
  Transition& t = sfc.transitions.at(site.index);
  Transition next;
  next.fromSteps = {step.name};
  next.toSteps = t.toSteps;
  next.condition = Expression::literal("TRUE", "BOOL");
  if (t.condition == next.condition) next.condition = Expression::literal("FALSE", "BOOL");
  t.toSteps = {step.name};
  const std::size_t newIndex = sfc.transitions.size();
  sfc.transitions.push_back(std::move(next));
  sfc.steps.push_back(step);
  StepResult r;
  r.records.push_back({site.path, {}, true});
  r.records.push_back({{}, body.child("steps", step.name), false});
  r.records.push_back({{}, body.child("transitions", std::to_string(newIndex)), false});
  r.edits.push_back({Edit::Kind::InsertNamed, body, "steps", step.name, ""});
  r.edits.push_back({Edit::Kind::Insert, body, "transitions", std::to_string(newIndex), ""});
  return r;
}

StepResult applyRemoveSfcStep(Project& p, const Site& site) {
  const ArtifactPath body = parentOf(site.path);
  const std::string name = site.path.segments().back().key;
  auto& sfc = mutableAt<SfcBody>(p, body);
  auto it = std::find_if(sfc.steps.begin(), sfc.steps.end(),
                         [&](const Step& s) { return s.name == name; });
  auto [in, out] = *stepBypass(sfc, *it);
  sfc.transitions[in].toSteps = sfc.transitions[out].toSteps;
  sfc.transitions.erase(sfc.transitions.begin() + static_cast<std::ptrdiff_t>(out));
  sfc.steps.erase(it);
  StepResult r;
  r.records.push_back({site.path, {}, false});
  r.records.push_back({body.child("transitions", std::to_string(out)), {}, false});
  r.records.push_back({body.child("transitions", std::to_string(in)), {}, true});
  r.edits.push_back({Edit::Kind::RemoveNamed, body, "steps", name, ""});
  r.edits.push_back({Edit::Kind::Remove, body, "transitions", std::to_string(out), ""});
  return r;
}

StepResult apply(Project& p, const Site& site, Rng& rng) {
  using O = MutationOperator;
  switch (site.op) {
    case O::RenameVariable: return applyRenameVariable(p, site.path, freshName(p, "VAR"));
    case O::RenamePou: return applyRenamePou(p, site.pou, freshName(p, "POU"));
    case O::RenameStepOrAction: {
      const bool step = site.path.segments().back().role == "steps";
      return applyRenameStepOrAction(p, site.path, freshName(p, step ? "STEP" : "ACTION"));
    }
    case O::ChangeLiteralValue: return applyChangeLiteral(p, site, rng);
    case O::ChangeBinaryOperator: return applyChangeOperator(p, site, rng);
    case O::AddStatement: return applyAddStatement(p, site, rng);
    case O::RemoveStatement: return removeStatements(p, {site.path});
    case O::AddVariable: return applyAddVariable(p, site, rng);
    case O::RemoveVariable: return applyRemoveVariable(p, site);
    case O::AddSfcStep: return applyAddSfcStep(p, site);
    case O::RemoveSfcStep: return applyRemoveSfcStep(p, site);
  }
  throw MutationError("internal: unknown operator");
}

// Folds one step's local records into the running context.
void mergeStep(std::vector<MutationRecord>& records, std::vector<Edit>& history,
               StepResult step, MutationOperator op) {
  std::vector<bool> merged(records.size(), false);
  std::vector<MutationRecord> fresh;
  for (auto& local : step.records) {
    std::optional<ArtifactPath> mutantPath =
        local.changed ? forwardAll(local.origin, step.edits) : local.mutant;
    if (local.origin) {
      auto hit = std::find_if(records.begin(), records.end(), [&](const MutationRecord& rec) {
        return rec.mutantPath && *rec.mutantPath == *local.origin;
      });
      if (hit != records.end()) {
        const auto i = static_cast<std::size_t>(hit - records.begin());
        if (!merged[i]) {
          hit->mutantPath = mutantPath;
          merged[i] = true;
        }
        continue;
      }
    }
    MutationRecord rec;
    rec.originPath = local.origin ? backwardAll(local.origin, history) : std::nullopt;
    rec.mutantPath = mutantPath;
    rec.operatorId = op;
    fresh.push_back(std::move(rec));
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!merged[i]) records[i].mutantPath = forwardAll(records[i].mutantPath, step.edits);
  }
  records.insert(records.end(), fresh.begin(), fresh.end());
  records.erase(std::remove_if(records.begin(), records.end(),
                               [](const MutationRecord& r) {
                                 return !r.originPath && !r.mutantPath;
                               }),
                records.end());
  history.insert(history.end(), step.edits.begin(), step.edits.end());
}

}  // namespace

std::string freshName(const Project& project, std::string_view prefix) {
  std::set<std::string> used;
  collectIdentifiers(project, used);
  std::string upperPrefix(prefix);
  for (auto& c : upperPrefix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (std::size_t k = 1;; ++k) {
    if (!used.count(upperPrefix + std::to_string(k))) return std::string(prefix) + std::to_string(k);
  }
}

std::map<MutationOperator, std::size_t> mutationSites(const Project& project) {
  std::map<MutationOperator, std::size_t> out;
  for (auto cat : {MutationCategory::T2, MutationCategory::T3}) {
    for (auto op : operatorsOf(cat)) out[op] = enumerateSites(project, op).size();
  }
  return out;
}

std::vector<MutationRecord> renameVariable(Project& project, const ArtifactPath& declaration,
                                           const std::string& newName) {
  if (!isIdentifier(newName)) throw MutationError("'" + newName + "' is not an identifier");
  std::vector<MutationRecord> records;
  std::vector<Edit> history;
  mergeStep(records, history, applyRenameVariable(project, declaration, newName),
            MutationOperator::RenameVariable);
  return records;
}

Mutant mutate(const Project& seed, MutationCategory category, std::size_t count,
              std::uint64_t rngSeed) {
  if (count == 0) throw MutationError("mutation count must be positive");
  Mutant m;
  m.project = seed;
  m.context.seedName = seed.name;
  m.context.rngSeed = rngSeed;
  m.context.category = category;
  m.context.requested = count;
  Rng rng(rngSeed);
  std::vector<Edit> history;
  for (std::size_t draw = 0; draw < count; ++draw) {
    std::vector<ArtifactPath> touched;
    for (const auto& r : m.context.records) {
      if (r.mutantPath) touched.push_back(*r.mutantPath);
    }
    std::vector<std::pair<MutationOperator, std::vector<Site>>> pool;
    for (auto op : operatorsOf(category)) {
      auto sites = enumerateSites(m.project, op);
      sites.erase(std::remove_if(sites.begin(), sites.end(),
                                 [&](const Site& s) { return conflicts(s, touched); }),
                  sites.end());
      if (!sites.empty()) pool.emplace_back(op, std::move(sites));
    }
    if (pool.empty()) {
      if (draw == 0) {
        std::string names;
        for (auto op : operatorsOf(category)) {
          names += (names.empty() ? "" : ", ") + std::string(toString(op));
        }
        throw MutationError("project '" + seed.name + "' has no mutable site for any " +
                            std::string(toString(category)) + " operator (" + names + ")");
      }
      break;
    }
    auto& [op, sites] = pool[rng.below(pool.size())];
    const Site& site = sites[rng.below(sites.size())];
    StepResult step = apply(m.project, site, rng);
    mergeStep(m.context.records, history, std::move(step), op);
    ++m.context.performed;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Context documents
// ---------------------------------------------------------------------------

std::string mutationContextJson(const MutationContext& context) {
  nlohmann::ordered_json j;
  j["seedName"] = context.seedName;
  j["rngSeed"] = context.rngSeed;
  j["category"] = std::string(toString(context.category));
  j["requested"] = context.requested;
  j["performed"] = context.performed;
  j["records"] = nlohmann::ordered_json::array();
  for (const auto& r : context.records) {
    nlohmann::ordered_json rec;
    rec["origin"] = r.originPath ? nlohmann::ordered_json(r.originPath->toString()) : nlohmann::ordered_json(nullptr);
    rec["mutant"] = r.mutantPath ? nlohmann::ordered_json(r.mutantPath->toString()) : nlohmann::ordered_json(nullptr);
    rec["operator"] = std::string(toString(r.operatorId));
    j["records"].push_back(std::move(rec));
  }
  return j.dump(2) + "\n";
}

MutationContext parseMutationContextJson(std::string_view document) {
  try {
    auto j = nlohmann::json::parse(document);
    MutationContext c;
    c.seedName = j.at("seedName").get<std::string>();
    c.rngSeed = j.at("rngSeed").get<std::uint64_t>();
    auto cat = mutationCategoryFromString(j.at("category").get<std::string>());
    if (!cat) throw MutationError("unknown mutation category");
    c.category = *cat;
    c.requested = j.value("requested", std::size_t{0});
    c.performed = j.value("performed", std::size_t{0});
    for (const auto& r : j.at("records")) {
      MutationRecord rec;
      if (!r.at("origin").is_null()) rec.originPath = ArtifactPath::fromString(r["origin"].get<std::string>());
      if (!r.at("mutant").is_null()) rec.mutantPath = ArtifactPath::fromString(r["mutant"].get<std::string>());
      auto op = mutationOperatorFromString(r.at("operator").get<std::string>());
      if (!op) throw MutationError("unknown mutation operator '" + r["operator"].get<std::string>() + "'");
      if (categoryOf(*op) != c.category) {
        throw MutationError("operator '" + std::string(toString(*op)) + "' is not in category " +
                            std::string(toString(c.category)));
      }
      rec.operatorId = *op;
      c.records.push_back(std::move(rec));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw MutationError(std::string("malformed mutation context: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

void EvalOutcome::finish() {
  precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double OperatorStats::recall() const {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double OperatorStats::precision() const {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

namespace {

std::string seedKey(const ArtifactPath& p) { return "seed:" + p.toString(); }
std::string mutantKey(const ArtifactPath& p) { return "mutant:" + p.toString(); }

std::string recordKey(const MutationRecord& r) {
  return r.originPath ? seedKey(*r.originPath) : mutantKey(*r.mutantPath);
}

struct Detection {
  EvalOutcome outcome;
  std::map<std::string, MutationOperator> truthOperator;
  std::vector<std::string> truePositives;
};

// A flagged artifact is explained by a record when its key is one of the
// record's keys, or when it lies below an artifact the record removed (seed
// side) or inserted (mutant side). A flagged pair is explained through
// either of its sides, so a removal and an insertion that the matching
// pairs up are both found. Each explained record counts once as a true
// positive; every unexplained flag is a false positive.
Detection detect(const Project& seed, const Project& mutant, const MutationContext& context,
                 const Metric& metric, double lambda) {
  if (context.seedName != seed.name) {
    throw MutationError("mutation context belongs to seed '" + context.seedName +
                        "', not '" + seed.name + "'");
  }
  Detection d;
  std::map<std::string, std::string> primaryOf;
  std::set<std::string> wholeSubtree;
  for (const auto& r : context.records) {
    if (r.originPath && !resolve(seed, *r.originPath)) {
      throw MutationError("context path '" + r.originPath->toString() + "' does not resolve in the seed");
    }
    if (r.mutantPath && !resolve(mutant, *r.mutantPath)) {
      throw MutationError("context path '" + r.mutantPath->toString() + "' does not resolve in the mutant");
    }
    if (!r.originPath && !r.mutantPath) throw MutationError("context record without paths");
    const std::string primary = recordKey(r);
    d.truthOperator.emplace(primary, r.operatorId);
    if (r.originPath) primaryOf.emplace(seedKey(*r.originPath), primary);
    if (r.mutantPath) primaryOf.emplace(mutantKey(*r.mutantPath), primary);
    if (!r.mutantPath) wholeSubtree.insert(seedKey(*r.originPath));
    if (!r.originPath) wholeSubtree.insert(mutantKey(*r.mutantPath));
  }
  auto explain = [&](bool seedSide, const ArtifactPath& path) -> std::optional<std::string> {
    auto key = [&](const ArtifactPath& q) { return seedSide ? seedKey(q) : mutantKey(q); };
    if (auto it = primaryOf.find(key(path)); it != primaryOf.end()) return it->second;
    const auto& segs = path.segments();
    for (std::size_t n = segs.size(); n-- > 0;) {
      std::string k = key(ArtifactPath(std::vector<PathSegment>(segs.begin(), segs.begin() + n)));
      if (wholeSubtree.count(k)) return primaryOf.at(k);
    }
    return std::nullopt;
  };
  SimilarityTree tree = compareInter(seed, mutant, metric);
  std::set<std::string> covered;
  std::set<std::string> unexplained;
  walkTree(
      tree,
      [&](const PairVisit& v) {
        if (!(v.node.ownSimilarity(metric.weighted) < lambda)) return;
        auto l = explain(true, v.leftPath);
        auto r = explain(false, v.rightPath);
        if (l) covered.insert(*l);
        if (r) covered.insert(*r);
        if (!l && !r) unexplained.insert(seedKey(v.leftPath));
      },
      [&](const UnmatchedVisit& v) {
        if (auto e = explain(v.leftSide, v.path)) {
          covered.insert(*e);
        } else {
          unexplained.insert(v.leftSide ? seedKey(v.path) : mutantKey(v.path));
        }
      });
  for (const auto& [key, op] : d.truthOperator) {
    if (covered.count(key)) {
      ++d.outcome.tp;
      d.truePositives.push_back(key);
    } else {
      ++d.outcome.fn;
      d.outcome.falseNegatives.push_back(key);
    }
  }
  d.outcome.fp = unexplained.size();
  d.outcome.falsePositives.assign(unexplained.begin(), unexplained.end());
  d.outcome.finish();
  return d;
}

}  // namespace

EvalOutcome evaluateDetection(const Project& seed, const Project& mutant,
                              const MutationContext& context, const Metric& metric,
                              double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw MutationError("lambda must lie in (0, 1]");
  return detect(seed, mutant, context, metric, lambda).outcome;
}

CampaignReport runCampaign(const std::vector<Project>& seeds, std::size_t iterations,
                           MutationCategory category, const Metric& metric, double lambda,
                           std::uint64_t rngSeed, unsigned jobs, std::size_t count) {
  if (seeds.empty()) throw MutationError("campaign needs at least one seed");
  if (iterations == 0) throw MutationError("campaign needs at least one iteration");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw MutationError("lambda must lie in (0, 1]");
  const auto start = std::chrono::steady_clock::now();

  struct IterationResult {
    Detection detection;
    std::vector<MutationOperator> operators;  // one per performed draw
  };
  std::vector<IterationResult> results(iterations);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= iterations) return;
      try {
        const Project& seed = seeds[i % seeds.size()];
        Mutant m = mutate(seed, category, count, splitmix64(rngSeed + i));
        results[i].detection = detect(seed, m.project, m.context, metric, lambda);
        for (const auto& r : m.context.records) results[i].operators.push_back(r.operatorId);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failureMutex);
        if (!failure) failure = std::current_exception();
        next = iterations;
        return;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(iterations)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  CampaignReport report;
  report.iterations = iterations;
  report.category = category;
  report.metricName = metric.name;
  report.lambda = lambda;
  report.rngSeed = rngSeed;
  for (auto op : operatorsOf(category)) report.perOperator[op];
  for (const auto& it : results) {
    const EvalOutcome& o = it.detection.outcome;
    report.aggregate.tp += o.tp;
    report.aggregate.fp += o.fp;
    report.aggregate.fn += o.fn;
    std::set<MutationOperator> seen;
    for (auto op : it.operators) {
      if (seen.insert(op).second) ++report.perOperator[op].mutations;
    }
    for (const auto& key : it.detection.truePositives) {
      ++report.perOperator[it.detection.truthOperator.at(key)].tp;
    }
    for (const auto& key : o.falseNegatives) {
      ++report.perOperator[it.detection.truthOperator.at(key)].fn;
    }
    // False positives have no record; they count against the first
    // operator of the iteration.
    if (!it.operators.empty()) report.perOperator[it.operators.front()].fp += o.fp;
  }
  report.aggregate.finish();
  report.elapsedSeconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

}  // namespace

std::string campaignReportJson(const CampaignReport& report, bool includeTiming) {
  nlohmann::ordered_json j;
  j["category"] = std::string(toString(report.category));
  j["metric"] = report.metricName;
  j["lambda"] = round4(report.lambda);
  j["rngSeed"] = report.rngSeed;
  j["iterations"] = report.iterations;
  j["tp"] = report.aggregate.tp;
  j["fp"] = report.aggregate.fp;
  j["fn"] = report.aggregate.fn;
  j["precision"] = round4(report.aggregate.precision);
  j["recall"] = round4(report.aggregate.recall);
  j["operators"] = nlohmann::ordered_json::array();
  for (const auto& [op, s] : report.perOperator) {
    nlohmann::ordered_json o;
    o["operator"] = std::string(toString(op));
    o["mutations"] = s.mutations;
    o["tp"] = s.tp;
    o["fp"] = s.fp;
    o["fn"] = s.fn;
    o["precision"] = round4(s.precision());
    o["recall"] = round4(s.recall());
    j["operators"].push_back(std::move(o));
  }
  if (includeTiming) j["elapsedSeconds"] = round4(report.elapsedSeconds);
  return j.dump(2) + "\n";
}

std::string campaignReportText(const CampaignReport& report, bool includeTiming) {
  std::ostringstream out;
  out << "campaign " << toString(report.category) << ", metric " << report.metricName
      << ", lambda " << fixed4(report.lambda) << ", " << report.iterations
      << " iterations, seed " << report.rngSeed << "\n";
  out << "precision " << fixed4(report.aggregate.precision) << "  recall "
      << fixed4(report.aggregate.recall) << "  (tp " << report.aggregate.tp << ", fp "
      << report.aggregate.fp << ", fn " << report.aggregate.fn << ")\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %9s %7s %7s %7s %9s %9s\n", "operator", "mutations",
                "tp", "fp", "fn", "precision", "recall");
  out << line;
  for (const auto& [op, s] : report.perOperator) {
    std::snprintf(line, sizeof line, "%-24s %9zu %7zu %7zu %7zu %9s %9s\n",
                  std::string(toString(op)).c_str(), s.mutations, s.tp, s.fp, s.fn,
                  fixed4(s.precision()).c_str(), fixed4(s.recall()).c_str());
    out << line;
  }
  if (includeTiming) out << "elapsed " << fixed4(report.elapsedSeconds) << " s\n";
  return out.str();
}

}  // namespace iecclone
