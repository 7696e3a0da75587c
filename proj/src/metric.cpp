#include "iecclone/metric.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace iecclone {

using nlohmann::json;

MetricValidationError::MetricValidationError(Kind kind, std::string node,
                                             const std::string& message)
    : std::runtime_error(node.empty() ? message : node + ": " + message),
      kind_(kind),
      node_(std::move(node)) {}

const MetricOption& Metric::resolve(const MetricOption& option) const {
  if (!option.nestedRef) return option;
  auto it = subMetrics.find(*option.nestedRef);
  if (it == subMetrics.end()) {
    throw MetricValidationError(MetricValidationError::Kind::DanglingReference, "",
                                "unknown sub-metric '" + *option.nestedRef + "'");
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

namespace {

enum class Attr : std::size_t {
  PouName, PouKind, PouReturnType,
  VarName, VarType, VarSection, VarInitialValue,
  StatementKind, AssignmentTargetName, ExpressionStructure, CallName, CallArgCount,
  ConditionStructure, LiteralValue, OperatorEqual, VarRefName, StStatementCount,
  StMaxNestingDepth,
  StepName, StepInitialFlag, ActionQualifier, TransitionConditionStructure,
  TransitionStepNames, SfcStepCount, SfcActionCount, ActionName,
  ContactVariable, ContactNegation, CoilVariable, CoilStorageKind, LdNetworkCount,
  BlockTypeName, BlockInstanceName, BlockPortCount, NetworkLabel, ConnectionCount,
  JumpTarget, NetworkVariables, FbdNetworkCount,
};

using T = ArtifactType;

const std::vector<AttributeInfo> kCatalog = {
    {"pou-name", T::Pou, true, "POU names are equal"},
    {"pou-kind", T::Pou, false, "program / function / function block"},
    {"pou-return-type", T::Pou, false, "function return types are equal"},
    {"var-name", T::Variable, true, "variable names are equal"},
    {"var-type", T::Variable, false, "data types are equal"},
    {"var-section", T::Variable, false, "declaration sections are equal"},
    {"var-initial-value", T::Variable, false, "initial values are equal"},
    {"statement-kind", T::Statement, false, "statement kinds are equal"},
    {"assignment-target-name", T::Statement, true, "assignment target / loop variable"},
    {"expression-structure", T::Statement, false, "tree edit similarity of value expressions"},
    {"call-name", T::Statement, true, "called POU names are equal"},
    {"call-arg-count", T::Statement, false, "ratio of call argument counts"},
    {"condition-structure", T::Statement, false, "tree edit similarity of conditions"},
    {"literal-value", T::Statement, false, "overlap of literal values"},
    {"operator-equal", T::Statement, false, "overlap of operators"},
    {"var-ref-name", T::Statement, true, "overlap of referenced variable names"},
    {"st-statement-count", T::StBody, false, "ratio of statement counts"},
    {"st-max-nesting-depth", T::StBody, false, "ratio of nesting depths"},
    {"step-name", T::Step, true, "step names are equal"},
    {"step-initial-flag", T::Step, false, "both or neither step is initial"},
    {"action-qualifier", T::Step, false, "overlap of action associations"},
    {"transition-condition-structure", T::Transition, false,
     "tree edit similarity of transition conditions"},
    {"transition-step-names", T::Transition, true, "overlap of source and target step names"},
    {"sfc-step-count", T::SfcBody, false, "ratio of step counts"},
    {"sfc-action-count", T::SfcBody, false, "ratio of action association counts"},
    {"action-name", T::Action, true, "action names are equal"},
    {"contact-variable", T::Contact, true, "contact variables are equal"},
    {"contact-negation", T::Contact, false, "contact negation flags are equal"},
    {"coil-variable", T::Coil, true, "coil variables are equal"},
    {"coil-storage-kind", T::Coil, false, "coil storage kinds are equal"},
    {"ld-network-count", T::LdBody, false, "ratio of LD network counts"},
    {"block-type-name", T::Block, false, "block types are equal"},
    {"block-instance-name", T::Block, true, "block instance names are equal"},
    {"block-port-count", T::Block, false, "ratio of port counts"},
    {"network-label", T::Network, false, "network labels are equal"},
    {"connection-count", T::Network, false, "ratio of connection counts"},
    {"jump-target", T::Network, false, "overlap of jump targets"},
    {"network-variables", T::Network, true, "overlap of variables wired to the network"},
    {"fbd-network-count", T::FbdBody, false, "ratio of FBD network counts"},
};

// --- expression helpers ---------------------------------------------------

bool sameLabel(const Expression& a, const Expression& b, bool structuralOnly) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expression::Kind::Binary: return a.binaryOp == b.binaryOp;
    case Expression::Kind::Unary: return a.unaryOp == b.unaryOp;
    case Expression::Kind::Literal:
      return a.literalType == b.literalType && (structuralOnly || a.text == b.text);
    case Expression::Kind::VarRef: return structuralOnly || a.text == b.text;
    case Expression::Kind::FuncCall: return a.text == b.text;
  }
  return false;
}

std::size_t forestSize(const std::vector<const Expression*>& f) {
  std::size_t n = 0;
  for (const auto* e : f) n += nodeCount(*e);
  return n;
}

std::size_t treeDistance(const Expression& a, const Expression& b, bool structuralOnly);

// Sequence edit distance over sibling subtrees.
template <class GetA, class GetB>
std::size_t forestDistance(std::size_t n, std::size_t m, GetA getA, GetB getB,
                           bool structuralOnly) {
  std::vector<std::size_t> sizeA(n), sizeB(m);
  for (std::size_t i = 0; i < n; ++i) sizeA[i] = nodeCount(getA(i));
  for (std::size_t j = 0; j < m; ++j) sizeB[j] = nodeCount(getB(j));
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 1; j <= m; ++j) prev[j] = prev[j - 1] + sizeB[j - 1];
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = prev[0] + sizeA[i - 1];
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + treeDistance(getA(i - 1), getB(j - 1), structuralOnly);
      std::size_t del = prev[j] + sizeA[i - 1];
      std::size_t ins = cur[j - 1] + sizeB[j - 1];
      cur[j] = std::min({sub, del, ins});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::size_t treeDistance(const Expression& a, const Expression& b, bool structuralOnly) {
  std::size_t relabel = sameLabel(a, b, structuralOnly) ? 0 : 1;
  return relabel + forestDistance(
                       a.operands.size(), b.operands.size(),
                       [&](std::size_t i) -> const Expression& { return a.operands[i]; },
                       [&](std::size_t j) -> const Expression& { return b.operands[j]; },
                       structuralOnly);
}

double forestSimilarity(const std::vector<const Expression*>& a,
                        const std::vector<const Expression*>& b, bool structuralOnly) {
  std::size_t size = std::max(forestSize(a), forestSize(b));
  if (size == 0) return 1.0;
  std::size_t d = forestDistance(
      a.size(), b.size(), [&](std::size_t i) -> const Expression& { return *a[i]; },
      [&](std::size_t j) -> const Expression& { return *b[j]; }, structuralOnly);
  return std::max(0.0, 1.0 - static_cast<double>(d) / static_cast<double>(size));
}

void collect(const Expression& e, std::vector<std::string>& literals,
             std::vector<std::string>& operators, std::vector<std::string>& refs) {
  switch (e.kind) {
    case Expression::Kind::Literal: literals.push_back(e.literalType + "#" + e.text); break;
    case Expression::Kind::Binary: operators.emplace_back(toString(e.binaryOp)); break;
    case Expression::Kind::Unary: operators.emplace_back(toString(e.unaryOp)); break;
    case Expression::Kind::VarRef: refs.push_back(e.text); break;
    case Expression::Kind::FuncCall: break;
  }
  for (const auto& op : e.operands) collect(op, literals, operators, refs);
}

struct ExprBags {
  std::vector<std::string> literals, operators, refs;
};

ExprBags bagsOf(const Statement& s) {
  ExprBags b;
  for (const auto* e : ownExpressions(s)) collect(*e, b.literals, b.operators, b.refs);
  return b;
}

std::vector<const Expression*> valueForest(const Statement& s) {
  std::vector<const Expression*> out;
  for (const auto* e : {&s.value, &s.from, &s.to, &s.by}) {
    if (*e) out.push_back(&**e);
  }
  for (const auto& a : s.args) out.push_back(&a.value);
  return out;
}

std::vector<const Expression*> conditionForest(const Statement& s) {
  if (s.condition) return {&*s.condition};
  return {};
}

double eq(bool same) { return same ? 1.0 : 0.0; }

std::size_t connectionCount(const ArtifactRef& r) {
  if (auto* ld = std::get_if<const LdNetwork*>(&r)) return (*ld)->wiring.size();
  return std::get<const FbdNetwork*>(r)->connections.size();
}

const std::optional<std::string>& networkLabel(const ArtifactRef& r) {
  if (auto* ld = std::get_if<const LdNetwork*>(&r)) return (*ld)->label;
  return std::get<const FbdNetwork*>(r)->label;
}

std::vector<std::string> jumpsOf(const ArtifactRef& r) {
  if (std::holds_alternative<const LdNetwork*>(r)) return {};
  return std::get<const FbdNetwork*>(r)->jumps;
}

std::vector<std::string> stepNames(const Transition& t) {
  std::vector<std::string> out;
  for (const auto& s : t.fromSteps) out.push_back("from:" + s);
  for (const auto& s : t.toSteps) out.push_back("to:" + s);
  return out;
}

std::vector<std::string> networkVariables(const ArtifactRef& r) {
  std::vector<std::string> literals, operators, refs;
  if (auto* fbd = std::get_if<const FbdNetwork*>(&r)) {
    for (const auto& e : (*fbd)->endpoints) collect(e, literals, operators, refs);
  }
  return refs;
}

std::vector<std::string> associations(const Step& s) {
  std::vector<std::string> out;
  for (const auto& a : s.actions) {
    out.push_back(std::string(toString(a.qualifier)) + ":" + a.actionRef + ":" + a.duration);
  }
  return out;
}

std::size_t actionAssociationCount(const SfcBody& b) {
  std::size_t n = 0;
  for (const auto& s : b.steps) n += s.actions.size();
  return n;
}

template <class P>
const P& as(const ArtifactRef& r) {
  return *std::get<const P*>(r);
}

double evaluate(Attr id, const ArtifactRef& x, const ArtifactRef& y) {
  switch (id) {
    case Attr::PouName: return eq(as<Pou>(x).name == as<Pou>(y).name);
    case Attr::PouKind: return eq(as<Pou>(x).kind == as<Pou>(y).kind);
    case Attr::PouReturnType: return eq(as<Pou>(x).returnType == as<Pou>(y).returnType);
    case Attr::VarName: return eq(as<VariableDecl>(x).name == as<VariableDecl>(y).name);
    case Attr::VarType: return eq(as<VariableDecl>(x).dataType == as<VariableDecl>(y).dataType);
    case Attr::VarSection: return eq(as<VariableDecl>(x).section == as<VariableDecl>(y).section);
    case Attr::VarInitialValue:
      return eq(as<VariableDecl>(x).initialValue == as<VariableDecl>(y).initialValue);
    case Attr::StatementKind: return eq(as<Statement>(x).kind == as<Statement>(y).kind);
    case Attr::AssignmentTargetName: return eq(as<Statement>(x).target == as<Statement>(y).target);
    case Attr::ExpressionStructure:
      return forestSimilarity(valueForest(as<Statement>(x)), valueForest(as<Statement>(y)), true);
    case Attr::CallName: return eq(as<Statement>(x).callee == as<Statement>(y).callee);
    case Attr::CallArgCount:
      return ratioSimilarity(as<Statement>(x).args.size(), as<Statement>(y).args.size());
    case Attr::ConditionStructure:
      return forestSimilarity(conditionForest(as<Statement>(x)),
                              conditionForest(as<Statement>(y)), true);
    case Attr::LiteralValue:
      return multisetOverlap(bagsOf(as<Statement>(x)).literals, bagsOf(as<Statement>(y)).literals);
    case Attr::OperatorEqual:
      return multisetOverlap(bagsOf(as<Statement>(x)).operators,
                             bagsOf(as<Statement>(y)).operators);
    case Attr::VarRefName:
      return multisetOverlap(bagsOf(as<Statement>(x)).refs, bagsOf(as<Statement>(y)).refs);
    case Attr::StStatementCount:
      return ratioSimilarity(totalStatementCount(as<StBody>(x)), totalStatementCount(as<StBody>(y)));
    case Attr::StMaxNestingDepth:
      return ratioSimilarity(maxNestingDepth(as<StBody>(x)), maxNestingDepth(as<StBody>(y)));
    case Attr::StepName: return eq(as<Step>(x).name == as<Step>(y).name);
    case Attr::StepInitialFlag: return eq(as<Step>(x).initial == as<Step>(y).initial);
    case Attr::ActionQualifier:
      return multisetOverlap(associations(as<Step>(x)), associations(as<Step>(y)));
    case Attr::TransitionConditionStructure: {
      const auto& a = as<Transition>(x);
      const auto& b = as<Transition>(y);
      if (a.condition && b.condition) return expressionSimilarity(*a.condition, *b.condition, false);
      if (!a.condition && !b.condition) return eq(a.bodyRef == b.bodyRef);
      return 0.0;
    }
    case Attr::TransitionStepNames:
      return multisetOverlap(stepNames(as<Transition>(x)), stepNames(as<Transition>(y)));
    case Attr::ActionName: return eq(as<NamedAction>(x).name == as<NamedAction>(y).name);
    case Attr::SfcStepCount:
      return ratioSimilarity(as<SfcBody>(x).steps.size(), as<SfcBody>(y).steps.size());
    case Attr::SfcActionCount:
      return ratioSimilarity(actionAssociationCount(as<SfcBody>(x)),
                             actionAssociationCount(as<SfcBody>(y)));
    case Attr::ContactVariable: return eq(as<Contact>(x).variable == as<Contact>(y).variable);
    case Attr::ContactNegation: return eq(as<Contact>(x).negated == as<Contact>(y).negated);
    case Attr::CoilVariable: return eq(as<Coil>(x).variable == as<Coil>(y).variable);
    case Attr::CoilStorageKind: return eq(as<Coil>(x).storage == as<Coil>(y).storage);
    case Attr::LdNetworkCount:
      return ratioSimilarity(as<LdBody>(x).networks.size(), as<LdBody>(y).networks.size());
    case Attr::BlockTypeName: return eq(as<FbdBlock>(x).typeName == as<FbdBlock>(y).typeName);
    case Attr::BlockInstanceName:
      return eq(as<FbdBlock>(x).instanceName == as<FbdBlock>(y).instanceName);
    case Attr::BlockPortCount: {
      const auto& a = as<FbdBlock>(x);
      const auto& b = as<FbdBlock>(y);
      return ratioSimilarity(a.inputPorts.size() + a.outputPorts.size(),
                             b.inputPorts.size() + b.outputPorts.size());
    }
    case Attr::NetworkLabel: return eq(networkLabel(x) == networkLabel(y));
    case Attr::ConnectionCount: return ratioSimilarity(connectionCount(x), connectionCount(y));
    case Attr::JumpTarget: return multisetOverlap(jumpsOf(x), jumpsOf(y));
    case Attr::NetworkVariables: return multisetOverlap(networkVariables(x), networkVariables(y));
    case Attr::FbdNetworkCount:
      return ratioSimilarity(as<FbdBody>(x).networks.size(), as<FbdBody>(y).networks.size());
  }
  return 0.0;
}

}  // namespace

const std::vector<AttributeInfo>& attributeCatalog() { return kCatalog; }

std::optional<std::size_t> attributeIndex(std::string_view id) {
  for (std::size_t i = 0; i < kCatalog.size(); ++i) {
    if (kCatalog[i].id == id) return i;
  }
  return std::nullopt;
}

double evalAttribute(std::size_t index, const ArtifactRef& x, const ArtifactRef& y) {
  if (index >= kCatalog.size()) {
    throw MetricValidationError(MetricValidationError::Kind::UnknownAttribute, "",
                                "attribute index out of range");
  }
  const AttributeInfo& info = kCatalog[index];
  if (typeOf(x) != info.type || typeOf(y) != info.type) {
    throw MetricValidationError(
        MetricValidationError::Kind::TypeMismatch, std::string(info.id),
        "attribute applies to " + std::string(toString(info.type)) + " artifacts, got " +
            std::string(toString(typeOf(x))) + " and " + std::string(toString(typeOf(y))));
  }
  return evaluate(static_cast<Attr>(index), x, y);
}

double evalAttribute(std::string_view id, const ArtifactRef& x, const ArtifactRef& y) {
  auto index = attributeIndex(id);
  if (!index) {
    throw MetricValidationError(MetricValidationError::Kind::UnknownAttribute, std::string(id),
                                "unknown attribute");
  }
  return evalAttribute(*index, x, y);
}

double ratioSimilarity(std::size_t a, std::size_t b) {
  if (a == 0 && b == 0) return 1.0;
  return static_cast<double>(std::min(a, b)) / static_cast<double>(std::max(a, b));
}

double multisetOverlap(std::vector<std::string> a, std::vector<std::string> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::string> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(std::max(a.size(), b.size()));
}

std::size_t expressionEditDistance(const Expression& a, const Expression& b,
                                   bool structuralOnly) {
  return treeDistance(a, b, structuralOnly);
}

double expressionSimilarity(const Expression& a, const Expression& b, bool structuralOnly) {
  return forestSimilarity({&a}, {&b}, structuralOnly);
}

// ---------------------------------------------------------------------------
// Builtin metrics
// ---------------------------------------------------------------------------

namespace {

MetricOption option(ArtifactType type, std::string label,
                    std::vector<std::string> attributes = {},
                    std::vector<MetricOption> options = {}) {
  MetricOption o;
  o.type = type;
  o.label = std::move(label);
  for (auto& a : attributes) o.attributes.push_back({std::move(a), 1.0});
  o.options = std::move(options);
  return o;
}

MetricOption pointer(ArtifactType type, std::string label, std::string ref) {
  MetricOption o;
  o.type = type;
  o.label = std::move(label);
  o.nestedRef = std::move(ref);
  return o;
}

std::vector<MetricOption> bodyPointers() {
  return {pointer(T::StBody, "Compare Nested ST", "st"),
          pointer(T::SfcBody, "Compare Nested SFC", "sfc"),
          pointer(T::LdBody, "Compare Nested LD", "ld"),
          pointer(T::FbdBody, "Compare Nested FBD", "fbd")};
}

Metric fineMetric() {
  Metric m;
  m.name = "fine";
  m.subMetrics["variable"] =
      option(T::Variable, "Variables", {"var-name", "var-type", "var-section", "var-initial-value"});
  m.subMetrics["st-statement"] = option(
      T::Statement, "Statements",
      {"statement-kind", "assignment-target-name", "expression-structure", "call-name",
       "call-arg-count", "condition-structure", "literal-value", "operator-equal",
       "var-ref-name"},
      {pointer(T::Statement, "Nested Statements", "st-statement")});
  m.subMetrics["st"] = option(T::StBody, "Structured Text", {},
                              {pointer(T::Statement, "Statements", "st-statement")});
  m.subMetrics["sfc"] = option(
      T::SfcBody, "Sequential Function Chart", {},
      {option(T::Step, "Steps", {"step-name", "step-initial-flag", "action-qualifier"}),
       option(T::Transition, "Transitions",
              {"transition-condition-structure", "transition-step-names"})});
  m.subMetrics["fbd-block"] = option(T::Block, "Blocks",
                                     {"block-type-name", "block-instance-name", "block-port-count"});
  m.subMetrics["ld"] = option(
      T::LdBody, "Ladder Diagram", {},
      {option(T::Network, "Networks", {"network-label", "connection-count"},
              {option(T::Contact, "Contacts", {"contact-variable", "contact-negation"}),
               option(T::Coil, "Coils", {"coil-variable", "coil-storage-kind"}),
               pointer(T::Block, "Compare Nested FBD Blocks", "fbd-block")})});
  m.subMetrics["fbd"] = option(
      T::FbdBody, "Function Block Diagram", {},
      {option(T::Network, "Networks",
              {"network-label", "connection-count", "jump-target", "network-variables"},
              {pointer(T::Block, "Blocks", "fbd-block"),
               pointer(T::StBody, "Compare Nested ST", "st")})});

  std::vector<MetricOption> pouOptions = {pointer(T::Variable, "Variables", "variable")};
  for (auto& b : bodyPointers()) pouOptions.push_back(std::move(b));
  pouOptions.push_back(option(T::Action, "Actions", {"action-name"}, bodyPointers()));
  m.root = option(T::Project, "Project", {},
                  {option(T::Pou, "POUs", {"pou-name", "pou-kind", "pou-return-type"},
                          std::move(pouOptions)),
                   pointer(T::Variable, "Global Variables", "variable")});
  return m;
}

Metric coarseMetric() {
  Metric m;
  m.name = "coarse";
  m.subMetrics["variable"] = option(T::Variable, "Variables");
  m.subMetrics["st"] =
      option(T::StBody, "Structured Text", {"st-statement-count", "st-max-nesting-depth"});
  m.subMetrics["sfc"] =
      option(T::SfcBody, "Sequential Function Chart", {"sfc-step-count", "sfc-action-count"});
  m.subMetrics["ld"] = option(T::LdBody, "Ladder Diagram", {"ld-network-count"});
  m.subMetrics["fbd"] = option(T::FbdBody, "Function Block Diagram", {"fbd-network-count"});

  std::vector<MetricOption> pouOptions = {pointer(T::Variable, "Variables", "variable")};
  for (auto& b : bodyPointers()) pouOptions.push_back(std::move(b));
  pouOptions.push_back(option(T::Action, "Actions", {}, bodyPointers()));
  m.root = option(T::Project, "Project", {},
                  {option(T::Pou, "POUs", {"pou-kind", "pou-return-type"}, std::move(pouOptions)),
                   pointer(T::Variable, "Global Variables", "variable")});
  return m;
}

}  // namespace

Metric builtinMetric(BuiltinMetric kind) {
  return kind == BuiltinMetric::Fine ? fineMetric() : coarseMetric();
}

std::optional<BuiltinMetric> builtinMetricFromString(std::string_view name) {
  if (name == "fine") return BuiltinMetric::Fine;
  if (name == "coarse") return BuiltinMetric::Coarse;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

using Kind = MetricValidationError::Kind;

void validateOption(const Metric& m, const MetricOption& o, const std::string& where) {
  if (!(o.weight >= 0.0 && o.weight <= 1.0)) {
    throw MetricValidationError(Kind::WeightOutOfRange, where,
                                "weight " + std::to_string(o.weight) + " outside [0,1]");
  }
  if (o.nestedRef) {
    if (!o.options.empty() || !o.attributes.empty()) {
      throw MetricValidationError(Kind::Syntax, where,
                                  "an option with nestedRef cannot declare its own children");
    }
    auto it = m.subMetrics.find(*o.nestedRef);
    if (it == m.subMetrics.end()) {
      throw MetricValidationError(Kind::DanglingReference, where,
                                  "nestedRef '" + *o.nestedRef + "' does not name a sub-metric");
    }
    if (it->second.type != o.type) {
      throw MetricValidationError(
          Kind::TypeMismatch, where,
          "nestedRef '" + *o.nestedRef + "' has type " + std::string(toString(it->second.type)) +
              ", option has type " + std::string(toString(o.type)));
    }
    return;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < o.attributes.size(); ++i) {
    const auto& a = o.attributes[i];
    std::string aw = where + "/attributes[" + std::to_string(i) + "]";
    auto idx = attributeIndex(a.id);
    if (!idx) throw MetricValidationError(Kind::UnknownAttribute, aw, "unknown attribute '" + a.id + "'");
    if (!(a.weight >= 0.0 && a.weight <= 1.0)) {
      throw MetricValidationError(Kind::WeightOutOfRange, aw,
                                  "weight " + std::to_string(a.weight) + " outside [0,1]");
    }
    if (kCatalog[*idx].type != o.type) {
      throw MetricValidationError(
          Kind::TypeMismatch, aw,
          "attribute '" + a.id + "' applies to " + std::string(toString(kCatalog[*idx].type)) +
              " artifacts, not " + std::string(toString(o.type)));
    }
    sum += a.weight;
  }
  for (std::size_t i = 0; i < o.options.size(); ++i) {
    const auto& sub = o.options[i];
    std::string ow = where + "/options[" + std::to_string(i) + "]";
    if (!canContain(o.type, sub.type)) {
      throw MetricValidationError(Kind::TypeMismatch, ow,
                                  std::string(toString(o.type)) + " artifacts have no " +
                                      std::string(toString(sub.type)) + " children");
    }
    validateOption(m, sub, ow);
    sum += sub.weight;
  }
  if (m.weighted && !(o.options.empty() && o.attributes.empty()) && sum <= 0.0) {
    throw MetricValidationError(Kind::ZeroWeightSum, where, "children weights sum to zero");
  }
}

}  // namespace

void validateMetric(const Metric& metric) {
  validateOption(metric, metric.root, "root");
  for (const auto& [name, option] : metric.subMetrics) {
    validateOption(metric, option, "subMetrics/" + name);
  }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

json optionToJson(const MetricOption& o) {
  json j;
  j["type"] = std::string(toString(o.type));
  j["weight"] = o.weight;
  if (!o.label.empty()) j["label"] = o.label;
  if (o.nestedRef) {
    j["nestedRef"] = *o.nestedRef;
    return j;
  }
  j["attributes"] = json::array();
  for (const auto& a : o.attributes) j["attributes"].push_back({{"id", a.id}, {"weight", a.weight}});
  j["options"] = json::array();
  for (const auto& sub : o.options) j["options"].push_back(optionToJson(sub));
  return j;
}

double readWeight(const json& j, const std::string& where) {
  if (!j.contains("weight")) return 1.0;
  if (!j["weight"].is_number()) throw MetricValidationError(Kind::Syntax, where, "weight must be a number");
  return j["weight"].get<double>();
}

MetricOption optionFromJson(const json& j, const std::string& where) {
  if (!j.is_object()) throw MetricValidationError(Kind::Syntax, where, "option must be an object");
  MetricOption o;
  if (!j.contains("type") || !j["type"].is_string()) {
    throw MetricValidationError(Kind::Syntax, where, "option needs a string 'type'");
  }
  auto type = artifactTypeFromString(j["type"].get<std::string>());
  if (!type) {
    throw MetricValidationError(Kind::UnknownType, where,
                                "unknown artifact type '" + j["type"].get<std::string>() + "'");
  }
  o.type = *type;
  o.weight = readWeight(j, where);
  if (j.contains("label")) o.label = j["label"].get<std::string>();
  if (j.contains("nestedRef") && !j["nestedRef"].is_null()) {
    if (!j["nestedRef"].is_string()) throw MetricValidationError(Kind::Syntax, where, "nestedRef must be a string");
    o.nestedRef = j["nestedRef"].get<std::string>();
  }
  if (j.contains("attributes")) {
    const json& attrs = j["attributes"];
    if (!attrs.is_array()) throw MetricValidationError(Kind::Syntax, where, "attributes must be an array");
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      std::string aw = where + "/attributes[" + std::to_string(i) + "]";
      const json& a = attrs[i];
      if (!a.is_object() || !a.contains("id") || !a["id"].is_string()) {
        throw MetricValidationError(Kind::Syntax, aw, "attribute needs a string 'id'");
      }
      o.attributes.push_back({a["id"].get<std::string>(), readWeight(a, aw)});
    }
  }
  if (j.contains("options")) {
    const json& opts = j["options"];
    if (!opts.is_array()) throw MetricValidationError(Kind::Syntax, where, "options must be an array");
    for (std::size_t i = 0; i < opts.size(); ++i) {
      o.options.push_back(optionFromJson(opts[i], where + "/options[" + std::to_string(i) + "]"));
    }
  }
  return o;
}

}  // namespace

std::string saveMetric(const Metric& metric) {
  json j;
  j["name"] = metric.name;
  j["weighted"] = metric.weighted;
  j["root"] = optionToJson(metric.root);
  j["subMetrics"] = json::object();
  for (const auto& [name, option] : metric.subMetrics) j["subMetrics"][name] = optionToJson(option);
  return j.dump(2) + "\n";
}

Metric loadMetric(std::string_view document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::parse_error& e) {
    throw MetricValidationError(Kind::Syntax, "", std::string("malformed metric document: ") + e.what());
  }
  if (!j.is_object()) throw MetricValidationError(Kind::Syntax, "", "metric document must be an object");
  Metric m;
  try {
    m.name = j.value("name", std::string("custom"));
    m.weighted = j.value("weighted", true);
  } catch (const json::exception& e) {
    throw MetricValidationError(Kind::Syntax, "", e.what());
  }
  if (!j.contains("root")) throw MetricValidationError(Kind::Syntax, "", "metric document has no 'root'");
  try {
    m.root = optionFromJson(j["root"], "root");
    if (j.contains("subMetrics")) {
      if (!j["subMetrics"].is_object()) throw MetricValidationError(Kind::Syntax, "subMetrics", "must be an object");
      for (const auto& [name, value] : j["subMetrics"].items()) {
        m.subMetrics[name] = optionFromJson(value, "subMetrics/" + name);
      }
    }
  } catch (const json::exception& e) {
    throw MetricValidationError(Kind::Syntax, "", e.what());
  }
  validateMetric(m);
  return m;
}

Metric loadMetricFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MetricValidationError(Kind::Syntax, path, "cannot open metric file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return loadMetric(buf.str());
}

}  // namespace iecclone
