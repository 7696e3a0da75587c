#include "iecclone/generator.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace iecclone {

namespace {

class Gen {
 public:
  explicit Gen(const GeneratorOptions& o) : o_(o), rng_(o.seed) {}

  Project run() {
    Project p;
    p.name = "Generated";
    p.metadata.emplace_back("configuration", "Config");
    p.metadata.emplace_back("resource", "Res");
    p.metadata.emplace_back("task", "Main");
    for (std::size_t i = 0; i < o_.pous; ++i) {
      Pou pou = makePou(i);
      if (pou.kind == PouKind::Program) {
        p.metadata.emplace_back("pouInstance", "Inst" + std::to_string(i) + ":" + pou.name);
      }
      p.pous.push_back(std::move(pou));
    }
    return p;
  }

 private:
  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  const VariableDecl& pick(const std::string& type) {
    std::vector<const VariableDecl*> c;
    for (const auto& v : vars_) {
      if (v.dataType == type) c.push_back(&v);
    }
    return *c[below(c.size())];
  }

  Expression literalOf(const std::string& type) {
    if (type == "BOOL") return Expression::literal(below(2) ? "TRUE" : "FALSE", "BOOL");
    if (type == "REAL") return Expression::literal(std::to_string(below(100)) + ".5", "REAL");
    return Expression::literal(std::to_string(below(100)), "INT");
  }

  Expression operand(const std::string& type) {
    return below(2) ? Expression::varRef(pick(type).name) : literalOf(type);
  }

  Expression numeric(const std::string& type, std::size_t depth) {
    if (depth == 0 || below(3) == 0) return operand(type);
    static const BinaryOperator kOps[] = {BinaryOperator::Add, BinaryOperator::Sub,
                                          BinaryOperator::Mul};
    return Expression::binary(kOps[below(3)], numeric(type, depth - 1), numeric(type, depth - 1));
  }

  Expression condition(std::size_t depth) {
    switch (depth == 0 ? 0 : below(3)) {
      case 0: return Expression::varRef(pick("BOOL").name);
      case 1: {
        static const BinaryOperator kCmp[] = {BinaryOperator::Lt, BinaryOperator::Gt,
                                              BinaryOperator::Eq, BinaryOperator::Ge};
        return Expression::binary(kCmp[below(4)], Expression::varRef(pick("INT").name),
                                  literalOf("INT"));
      }
      default:
        return Expression::binary(below(2) ? BinaryOperator::And : BinaryOperator::Or,
                                  condition(depth - 1), condition(depth - 1));
    }
  }

  Statement assignment() {
    static const char* kTypes[] = {"BOOL", "INT", "REAL"};
    std::string type = kTypes[below(3)];
    Statement s;
    s.kind = StatementKind::Assignment;
    s.target = pick(type).name;
    s.value = type == "BOOL" ? condition(2) : numeric(type, 2);
    return s;
  }

  std::vector<Statement> block(std::size_t count, std::size_t depth) {
    std::vector<Statement> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(statement(depth));
    return out;
  }

  Statement statement(std::size_t depth) {
    const std::size_t roll = depth >= o_.maxNesting ? 0 : below(6);
    Statement s;
    switch (roll) {
      case 3:
        s.kind = StatementKind::If;
        s.condition = condition(2);
        s.children = block(1 + below(3), depth + 1);
        if (below(2)) s.elseChildren = block(1 + below(2), depth + 1);
        return s;
      case 4:
        s.kind = StatementKind::For;
        s.target = pick("INT").name;
        s.from = Expression::literal("1", "INT");
        s.to = Expression::literal(std::to_string(2 + below(9)), "INT");
        s.children = block(1 + below(3), depth + 1);
        return s;
      case 5: {
        s.kind = StatementKind::Case;
        s.condition = Expression::varRef(pick("INT").name);
        const std::size_t branches = 2 + below(2);
        for (std::size_t b = 0; b < branches; ++b) {
          s.caseBranches.push_back({{std::to_string(b)}, block(1 + below(2), depth + 1)});
        }
        return s;
      }
      default: return assignment();
    }
  }

  void makeVariables(Pou& pou) {
    static const char* kTypes[] = {"BOOL", "INT", "REAL"};
    const std::size_t n = std::max<std::size_t>(o_.variablesPerPou, 3);
    for (std::size_t k = 0; k < n; ++k) {
      VariableDecl v;
      v.name = "v" + std::to_string(k);
      // The first three cover every type so that pick() always succeeds.
      v.dataType = k < 3 ? kTypes[k] : kTypes[below(3)];
      v.section = k % 5 == 0 ? VarSection::Input : k % 5 == 1 ? VarSection::Output
                                                             : VarSection::Local;
      if (below(4) == 0) v.initialValue = v.dataType == "BOOL" ? "FALSE" : "0";
      pou.variables.push_back(std::move(v));
    }
    // Sections in declaration order.
    std::stable_sort(pou.variables.begin(), pou.variables.end(),
                     [](const VariableDecl& a, const VariableDecl& b) { return a.section < b.section; });
    vars_ = pou.variables;
  }

  SfcBody makeSfc(Pou& pou) {
    SfcBody sfc;
    const std::size_t steps = 3 + o_.statementsPerPou / 4;
    for (std::size_t k = 0; k < steps; ++k) {
      Step st;
      st.name = "S" + std::to_string(k);
      st.initial = k == 0;
      if (k > 0) {
        std::string action = "A" + std::to_string(k);
        st.actions.push_back({ActionQualifier::N, action, ""});
        pou.actions.push_back({action, LanguageBody{StBody{block(2 + below(3), 1)}}});
      }
      sfc.steps.push_back(std::move(st));
    }
    for (std::size_t k = 0; k < steps; ++k) {
      Transition t;
      t.fromSteps = {"S" + std::to_string(k)};
      t.toSteps = {"S" + std::to_string((k + 1) % steps)};
      t.condition = condition(1);
      sfc.transitions.push_back(std::move(t));
    }
    return sfc;
  }

  LdBody makeLd() {
    LdBody ld;
    const std::size_t networks = 1 + o_.statementsPerPou / 3;
    for (std::size_t k = 0; k < networks; ++k) {
      LdNetwork net;
      const std::size_t contacts = 1 + below(3);
      for (std::size_t c = 0; c < contacts; ++c) {
        net.elements.emplace_back(Contact{pick("BOOL").name, below(4) == 0});
        if (c > 0) net.wiring.emplace_back(c - 1, c);
      }
      net.elements.emplace_back(Coil{pick("BOOL").name, CoilStorage::Normal});
      net.wiring.emplace_back(contacts - 1, contacts);
      ld.networks.push_back(std::move(net));
    }
    return ld;
  }

  Pou makePou(std::size_t i) {
    Pou pou;
    pou.name = "Pou" + std::to_string(i);
    pou.kind = i % 3 == 2 ? PouKind::FunctionBlock : PouKind::Program;
    makeVariables(pou);
    const std::size_t lang = o_.mixLanguages ? i % 4 : 0;
    if (lang == 2) {
      pou.body = LanguageBody{makeSfc(pou)};
    } else if (lang == 3) {
      pou.body = LanguageBody{makeLd()};
    } else {
      pou.body = LanguageBody{StBody{block(o_.statementsPerPou, 1)}};
    }
    return pou;
  }

  GeneratorOptions o_;
  std::mt19937_64 rng_;
  std::vector<VariableDecl> vars_;
};

}  // namespace

Project generateProject(const GeneratorOptions& options) { return Gen(options).run(); }

}  // namespace iecclone
