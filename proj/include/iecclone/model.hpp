#pragma once

// In-memory model of an IEC 61131-3 project: the artifact tree that
// comparison, mutation and reporting operate on.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace iecclone {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ArtifactType : std::uint8_t {
  Project,
  Pou,
  Variable,
  StBody,
  SfcBody,
  LdBody,
  FbdBody,
  Statement,
  Step,
  Transition,
  Action,
  Network,
  Contact,
  Coil,
  Block,
  Expression,
};

std::string_view toString(ArtifactType type);
std::optional<ArtifactType> artifactTypeFromString(std::string_view name);

enum class Language : std::uint8_t { ST, SFC, LD, FBD };

std::string_view toString(Language language);
ArtifactType bodyTypeOf(Language language);

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class BinaryOperator : std::uint8_t {
  And, Or, Xor, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Mod, Pow,
};

enum class UnaryOperator : std::uint8_t { Not, Neg };

std::string_view toString(BinaryOperator op);
std::string_view toString(UnaryOperator op);

struct Expression {
  enum class Kind : std::uint8_t { Binary, Unary, Literal, VarRef, FuncCall };

  Kind kind = Kind::Literal;
  BinaryOperator binaryOp = BinaryOperator::And;
  UnaryOperator unaryOp = UnaryOperator::Not;
  // Literal value, variable name or function name depending on kind.
  std::string text;
  // Type name for literals (BOOL, INT, REAL, TIME, STRING, ...).
  std::string literalType;
  std::vector<Expression> operands;

  static Expression binary(BinaryOperator op, Expression lhs, Expression rhs);
  static Expression unary(UnaryOperator op, Expression operand);
  static Expression literal(std::string value, std::string type);
  static Expression varRef(std::string name);
  static Expression call(std::string name, std::vector<Expression> args);

  bool operator==(const Expression&) const = default;
};

/// Number of nodes in the expression tree.
std::size_t nodeCount(const Expression& expr);

/// Canonical single-line rendering, fully parenthesized for nested binaries.
std::string render(const Expression& expr);

// ---------------------------------------------------------------------------
// Structured Text
// ---------------------------------------------------------------------------

enum class StatementKind : std::uint8_t { If, Case, For, While, Assignment, Call };

std::string_view toString(StatementKind kind);

struct CallArgument {
  std::string name;     // formal parameter, empty for positional arguments
  bool output = false;  // `name => var`
  Expression value;

  bool operator==(const CallArgument&) const = default;
};

struct Statement;

struct CaseBranch {
  std::vector<std::string> labels;
  std::vector<Statement> statements;

  bool operator==(const CaseBranch& other) const;
};

struct Statement {
  StatementKind kind = StatementKind::Assignment;
  // IF / WHILE condition, CASE selector.
  std::optional<Expression> condition;
  // Assignment target or FOR loop variable.
  std::string target;
  // Assignment value.
  std::optional<Expression> value;
  std::string callee;
  std::vector<CallArgument> args;
  std::optional<Expression> from;
  std::optional<Expression> to;
  std::optional<Expression> by;
  // THEN branch or loop body.
  std::vector<Statement> children;
  std::vector<CaseBranch> caseBranches;
  // ELSE branch of IF and CASE. ELSIF chains are nested IFs here.
  std::vector<Statement> elseChildren;

  bool operator==(const Statement& other) const;
};

struct StBody {
  std::vector<Statement> statements;

  bool operator==(const StBody&) const = default;
};

// ---------------------------------------------------------------------------
// Sequential Function Chart
// ---------------------------------------------------------------------------

enum class ActionQualifier : std::uint8_t {
  N, R, S, L, D, P, SD, DS, SL, Entry, Exit,
};

std::string_view toString(ActionQualifier qualifier);
std::optional<ActionQualifier> actionQualifierFromString(std::string_view text);

struct ActionAssociation {
  ActionQualifier qualifier = ActionQualifier::N;
  std::string actionRef;
  std::string duration;  // for timed qualifiers, empty otherwise

  bool operator==(const ActionAssociation&) const = default;
};

struct Step {
  std::string name;
  bool initial = false;
  std::vector<ActionAssociation> actions;

  bool operator==(const Step&) const = default;
};

struct Transition {
  std::vector<std::string> fromSteps;
  std::vector<std::string> toSteps;
  std::optional<Expression> condition;
  // Name of a separately implemented transition body, when not inline.
  std::string bodyRef;

  bool operator==(const Transition&) const = default;
};

struct SfcBody {
  std::vector<Step> steps;
  std::vector<Transition> transitions;

  bool operator==(const SfcBody&) const = default;
};

// ---------------------------------------------------------------------------
// Ladder Diagram and Function Block Diagram
// ---------------------------------------------------------------------------

struct FbdBlock {
  std::string typeName;
  std::optional<std::string> instanceName;
  std::vector<std::string> inputPorts;
  std::vector<std::string> outputPorts;

  bool operator==(const FbdBlock&) const = default;
};

struct Contact {
  std::string variable;
  bool negated = false;

  bool operator==(const Contact&) const = default;
};

enum class CoilStorage : std::uint8_t { Normal, Set, Reset };

std::string_view toString(CoilStorage storage);

struct Coil {
  std::string variable;
  CoilStorage storage = CoilStorage::Normal;

  bool operator==(const Coil&) const = default;
};

using LdElement = std::variant<Contact, Coil, FbdBlock>;

struct LdNetwork {
  std::optional<std::string> label;
  std::vector<LdElement> elements;
  // (from element index, to element index); power rails are not modeled.
  std::vector<std::pair<std::size_t, std::size_t>> wiring;

  bool operator==(const LdNetwork&) const = default;
};

struct LdBody {
  std::vector<LdNetwork> networks;

  bool operator==(const LdBody&) const = default;
};

struct PortRef {
  enum class Kind : std::uint8_t { Block, Endpoint };
  Kind kind = Kind::Block;
  std::size_t index = 0;
  std::string port;  // formal parameter; empty for endpoints

  bool operator==(const PortRef&) const = default;
};

struct FbdConnection {
  PortRef source;
  PortRef sink;

  bool operator==(const FbdConnection&) const = default;
};

struct FbdNetwork {
  std::optional<std::string> label;
  std::vector<FbdBlock> blocks;
  // Variable references or literals wired to block ports.
  std::vector<Expression> endpoints;
  std::vector<FbdConnection> connections;
  std::vector<std::string> jumps;
  std::optional<StBody> nestedSt;

  bool operator==(const FbdNetwork&) const = default;
};

struct FbdBody {
  std::vector<FbdNetwork> networks;

  bool operator==(const FbdBody&) const = default;
};

// ---------------------------------------------------------------------------
// Configuration level
// ---------------------------------------------------------------------------

struct LanguageBody {
  std::variant<StBody, SfcBody, LdBody, FbdBody> content;

  Language language() const { return static_cast<Language>(content.index()); }

  bool operator==(const LanguageBody&) const = default;
};

struct NamedAction {
  std::string name;
  LanguageBody body;

  bool operator==(const NamedAction&) const = default;
};

enum class VarSection : std::uint8_t { Input, Output, InOut, Local, Global, Temp };

std::string_view toString(VarSection section);

struct VariableDecl {
  std::string name;
  std::string dataType;
  VarSection section = VarSection::Local;
  std::optional<std::string> initialValue;

  bool operator==(const VariableDecl&) const = default;
};

enum class PouKind : std::uint8_t { Program, Function, FunctionBlock };

std::string_view toString(PouKind kind);

struct Pou {
  std::string name;
  PouKind kind = PouKind::Program;
  std::optional<std::string> returnType;
  std::vector<VariableDecl> variables;
  LanguageBody body;
  std::vector<NamedAction> actions;

  bool operator==(const Pou&) const = default;
};

struct Project {
  std::string name;
  std::vector<VariableDecl> globalVariables;
  std::vector<Pou> pous;
  // Configuration/resource/task data the comparison never descends into.
  std::vector<std::pair<std::string, std::string>> metadata;

  bool operator==(const Project&) const = default;
};

// ---------------------------------------------------------------------------
// Generic artifact access
// ---------------------------------------------------------------------------

/// Non-owning handle to any model node.
using ArtifactRef =
    std::variant<const Project*, const Pou*, const VariableDecl*, const StBody*,
                 const SfcBody*, const LdBody*, const FbdBody*,
                 const Statement*, const Step*, const Transition*,
                 const NamedAction*, const LdNetwork*, const FbdNetwork*,
                 const Contact*, const Coil*, const FbdBlock*,
                 const Expression*>;

ArtifactType typeOf(const ArtifactRef& ref);

/// Address of a language body held by a LanguageBody.
ArtifactRef bodyRef(const LanguageBody& body);

struct PathSegment {
  std::string role;
  std::string key;  // name, language tag, or decimal index

  bool operator==(const PathSegment&) const = default;
};

/// Total order on segments: by role, then by key. Keys that are both decimal
/// indices compare numerically.
int compareSegments(const PathSegment& a, const PathSegment& b);

class ArtifactPath {
 public:
  ArtifactPath() = default;
  explicit ArtifactPath(std::vector<PathSegment> segments)
      : segments_(std::move(segments)) {}

  const std::vector<PathSegment>& segments() const { return segments_; }
  std::vector<PathSegment>& segments() { return segments_; }
  bool empty() const { return segments_.empty(); }
  std::size_t size() const { return segments_.size(); }

  ArtifactPath child(PathSegment segment) const;
  ArtifactPath child(std::string role, std::string key) const;
  bool isPrefixOf(const ArtifactPath& other) const;

  /// "pous/EXAMPLE/variables/A"; the project root is "".
  std::string toString() const;
  static ArtifactPath fromString(std::string_view text);

  bool operator==(const ArtifactPath&) const = default;
  friend bool operator<(const ArtifactPath& a, const ArtifactPath& b);

 private:
  std::vector<PathSegment> segments_;
};

struct ChildEntry {
  ArtifactRef ref;
  PathSegment segment;
};

/// All direct children of an artifact, in model order.
std::vector<ChildEntry> childEntries(const ArtifactRef& artifact);

/// Direct children of the given type, in model order.
std::vector<ChildEntry> childEntries(const ArtifactRef& artifact,
                                     ArtifactType type);

std::vector<ArtifactRef> childrenOf(const ArtifactRef& artifact,
                                    ArtifactType type);

/// True when artifacts of type `parent` can have children of type `child`.
bool canContain(ArtifactType parent, ArtifactType child);

/// Path from the project root. Throws ModelError for detached artifacts.
ArtifactPath pathOf(const Project& project, const ArtifactRef& artifact);

std::optional<ArtifactRef> resolve(const Project& project,
                                   const ArtifactPath& path);

/// Short human-readable description, e.g. "Variable A : BOOL".
std::string describe(const ArtifactRef& artifact);

/// Structural invariant check; returns one message per violation.
std::vector<std::string> checkInvariants(const Project& project);

/// Statements anywhere below `body`, including nested branches.
std::size_t totalStatementCount(const StBody& body);

/// Deepest statement nesting level; top-level statements are depth 1.
std::size_t maxNestingDepth(const StBody& body);

/// The expressions a statement evaluates itself (condition, value, loop
/// bounds, call arguments), excluding those of nested statements.
std::vector<const Expression*> ownExpressions(const Statement& statement);

/// Root identifier of a possibly qualified reference: "T1.Q" -> "T1".
std::string_view rootIdentifier(std::string_view reference);

bool isIdentifier(std::string_view text);

}  // namespace iecclone
