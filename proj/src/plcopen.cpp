#include "iecclone/plcopen.hpp"

#include <expat.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>

namespace iecclone {

namespace {

// ---------------------------------------------------------------------------
// Minimal DOM built with expat
// ---------------------------------------------------------------------------

struct XmlNode {
  std::string name;  // local name, namespace prefix stripped
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<std::unique_ptr<XmlNode>> children;
  std::string text;  // direct character data
  int line = 0;
  int column = 0;

  const std::string* attr(std::string_view key) const {
    for (const auto& [k, v] : attrs) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  std::string attrOr(std::string_view key, std::string fallback = {}) const {
    const std::string* v = attr(key);
    return v ? *v : fallback;
  }

  const XmlNode* child(std::string_view n) const {
    for (const auto& c : children) {
      if (c->name == n) return c.get();
    }
    return nullptr;
  }

  std::vector<const XmlNode*> childrenNamed(std::string_view n) const {
    std::vector<const XmlNode*> out;
    for (const auto& c : children) {
      if (c->name == n) out.push_back(c.get());
    }
    return out;
  }

  const XmlNode* descendant(std::string_view n) const {
    for (const auto& c : children) {
      if (c->name == n) return c.get();
      if (const XmlNode* d = c->descendant(n)) return d;
    }
    return nullptr;
  }

  std::string allText() const {
    std::string out = text;
    for (const auto& c : children) out += c->allText();
    return out;
  }
};

std::string localName(const char* qname) {
  std::string_view s(qname);
  // expat is created without namespace processing, so names arrive as
  // "prefix:local".
  auto colon = s.rfind(':');
  return std::string(colon == std::string_view::npos ? s : s.substr(colon + 1));
}

struct DomBuilder {
  std::unique_ptr<XmlNode> root;
  std::vector<XmlNode*> stack;
  XML_Parser parser = nullptr;

  static void start(void* data, const char* name, const char** atts) {
    auto* self = static_cast<DomBuilder*>(data);
    auto node = std::make_unique<XmlNode>();
    node->name = localName(name);
    node->line = static_cast<int>(XML_GetCurrentLineNumber(self->parser));
    node->column = static_cast<int>(XML_GetCurrentColumnNumber(self->parser)) + 1;
    for (int i = 0; atts[i]; i += 2) {
      node->attrs.emplace_back(localName(atts[i]), atts[i + 1]);
    }
    XmlNode* raw = node.get();
    if (self->stack.empty()) {
      self->root = std::move(node);
    } else {
      self->stack.back()->children.push_back(std::move(node));
    }
    self->stack.push_back(raw);
  }

  static void end(void* data, const char*) {
    static_cast<DomBuilder*>(data)->stack.pop_back();
  }

  static void chars(void* data, const char* s, int len) {
    auto* self = static_cast<DomBuilder*>(data);
    if (!self->stack.empty()) self->stack.back()->text.append(s, static_cast<std::size_t>(len));
  }
};

std::unique_ptr<XmlNode> parseXml(std::string_view xml) {
  DomBuilder builder;
  XML_Parser parser = XML_ParserCreate("UTF-8");
  if (!parser) throw ParseError("cannot allocate XML parser");
  builder.parser = parser;
  XML_SetUserData(parser, &builder);
  XML_SetElementHandler(parser, &DomBuilder::start, &DomBuilder::end);
  XML_SetCharacterDataHandler(parser, &DomBuilder::chars);
  if (XML_Parse(parser, xml.data(), static_cast<int>(xml.size()), 1) == XML_STATUS_ERROR) {
    std::string msg = std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser));
    int line = static_cast<int>(XML_GetCurrentLineNumber(parser));
    int col = static_cast<int>(XML_GetCurrentColumnNumber(parser)) + 1;
    XML_ParserFree(parser);
    throw ParseError(msg, line, col);
  }
  XML_ParserFree(parser);
  if (!builder.root) throw ParseError("empty XML document");
  return std::move(builder.root);
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string sanitizeIdentifier(std::string_view raw) {
  std::string out;
  for (char c : trim(raw)) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  }
  if (!out.empty() && std::isdigit(static_cast<unsigned char>(out[0]))) out = "_" + out;
  return out;
}

// ---------------------------------------------------------------------------
// Graphical body helpers shared by SFC, LD and FBD
// ---------------------------------------------------------------------------

struct Link {
  std::string sourceId;
  std::string sourcePort;  // formalParameter of the source output, may be empty
  std::string sinkPort;    // formalParameter of the sink input, empty for plain pins
};

std::vector<Link> incomingLinks(const XmlNode& element) {
  std::vector<Link> out;
  auto collect = [&out](const XmlNode& pointIn, const std::string& sinkPort) {
    for (const XmlNode* c : pointIn.childrenNamed("connection")) {
      out.push_back({c->attrOr("refLocalId"), c->attrOr("formalParameter"), sinkPort});
    }
  };
  for (const XmlNode* p : element.childrenNamed("connectionPointIn")) collect(*p, "");
  for (const char* section : {"inputVariables", "inOutVariables"}) {
    if (const XmlNode* vars = element.child(section)) {
      for (const XmlNode* v : vars->childrenNamed("variable")) {
        if (const XmlNode* p = v->child("connectionPointIn")) collect(*p, v->attrOr("formalParameter"));
      }
    }
  }
  return out;
}

class ProjectReader {
 public:
  ProjectReader() = default;

  ParsedProject read(const XmlNode& root) {
    if (root.name != "project") {
      throw ParseError("root element is <" + root.name + ">, expected <project>", root.line,
                       root.column);
    }
    ParsedProject out;
    report_ = &out.report;
    Project& p = out.project;
    std::string name;
    if (const XmlNode* header = root.child("contentHeader")) name = header->attrOr("name");
    p.name = sanitizeIdentifier(name);
    if (p.name.empty()) p.name = std::string(kFallbackProjectName);

    for (const auto& c : root.children) {
      if (c->name == "types") {
        readTypes(*c, p);
      } else if (c->name == "instances") {
        readInstances(*c, p);
      } else if (c->name == "fileHeader" || c->name == "contentHeader" ||
                 c->name == "addData" || c->name == "documentation") {
        // not modeled
      } else {
        skip("", *c);
      }
    }

    auto violations = checkInvariants(p);
    if (!violations.empty()) throw ParseError("invalid project: " + violations.front());
    return out;
  }

 private:
  void warn(const std::string& locator, const std::string& message) {
    report_->warnings.push_back({locator, message});
  }

  void skip(const std::string& locator, const XmlNode& node) {
    ++report_->skippedElements;
    warn(locator, "skipped unsupported element <" + node.name + "> at line " +
                      std::to_string(node.line));
  }

  void readTypes(const XmlNode& types, Project& p) {
    for (const auto& c : types.children) {
      if (c->name == "pous") {
        for (const XmlNode* pou : c->childrenNamed("pou")) p.pous.push_back(readPou(*pou));
      } else if (c->name == "dataTypes") {
        for (const XmlNode* dt : c->childrenNamed("dataType")) {
          p.metadata.emplace_back("dataType", dt->attrOr("name"));
        }
      } else if (c->name != "addData" && c->name != "documentation") {
        skip("", *c);
      }
    }
  }

  void readInstances(const XmlNode& instances, Project& p) {
    const XmlNode* configs = instances.child("configurations");
    if (!configs) return;
    for (const XmlNode* cfg : configs->childrenNamed("configuration")) {
      p.metadata.emplace_back("configuration", cfg->attrOr("name"));
      for (const XmlNode* g : cfg->childrenNamed("globalVars")) {
        readVariables(*g, VarSection::Global, p.globalVariables);
      }
      for (const XmlNode* res : cfg->childrenNamed("resource")) {
        p.metadata.emplace_back("resource", res->attrOr("name"));
        for (const XmlNode* g : res->childrenNamed("globalVars")) {
          readVariables(*g, VarSection::Global, p.globalVariables);
        }
        for (const XmlNode* task : res->childrenNamed("task")) {
          p.metadata.emplace_back("task", task->attrOr("name"));
          for (const XmlNode* inst : task->childrenNamed("pouInstance")) {
            p.metadata.emplace_back("pouInstance",
                                    inst->attrOr("name") + ":" + inst->attrOr("typeName"));
          }
        }
        for (const XmlNode* inst : res->childrenNamed("pouInstance")) {
          p.metadata.emplace_back("pouInstance",
                                  inst->attrOr("name") + ":" + inst->attrOr("typeName"));
        }
      }
    }
  }

  static std::string typeName(const XmlNode* type) {
    if (!type || type->children.empty()) return {};
    const XmlNode& t = *type->children.front();
    if (t.name == "derived") return t.attrOr("name");
    if (t.name == "string" || t.name == "wstring") {
      std::string base = t.name == "string" ? "STRING" : "WSTRING";
      if (const std::string* len = t.attr("length")) return base + "(" + *len + ")";
      return base;
    }
    if (t.name == "array") {
      std::string dims;
      for (const XmlNode* d : t.childrenNamed("dimension")) {
        if (!dims.empty()) dims += ",";
        dims += d->attrOr("lower") + ".." + d->attrOr("upper");
      }
      return "ARRAY[" + dims + "] OF " + typeName(t.child("baseType"));
    }
    if (t.name == "pointer") return "POINTER TO " + typeName(t.child("baseType"));
    std::string up = t.name;
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return up;
  }

  static std::string valueText(const XmlNode& value) {
    if (value.name == "simpleValue") return value.attrOr("value");
    std::string out;
    for (const auto& c : value.children) {
      std::string inner = valueText(*c);
      if (inner.empty()) continue;
      if (!out.empty()) out += ",";
      if (const std::string* member = c->attr("member")) out += *member + ":=";
      out += inner;
    }
    if (value.name == "arrayValue") return "[" + out + "]";
    if (value.name == "structValue") return "(" + out + ")";
    return out;
  }

  void readVariables(const XmlNode& section, VarSection kind, std::vector<VariableDecl>& out) {
    for (const XmlNode* v : section.childrenNamed("variable")) {
      VariableDecl d;
      d.name = v->attrOr("name");
      d.dataType = typeName(v->child("type"));
      d.section = kind;
      if (const XmlNode* init = v->child("initialValue")) {
        if (!init->children.empty()) d.initialValue = valueText(*init->children.front());
      }
      out.push_back(std::move(d));
    }
  }

  Pou readPou(const XmlNode& node) {
    Pou pou;
    pou.name = node.attrOr("name");
    const std::string where = "pous/" + pou.name;
    std::string type = node.attrOr("pouType", "program");
    if (type == "function") {
      pou.kind = PouKind::Function;
    } else if (type == "functionBlock") {
      pou.kind = PouKind::FunctionBlock;
    } else {
      pou.kind = PouKind::Program;
    }
    if (const XmlNode* iface = node.child("interface")) {
      for (const auto& c : iface->children) {
        static const std::map<std::string, VarSection> kSections = {
            {"inputVars", VarSection::Input},   {"outputVars", VarSection::Output},
            {"inOutVars", VarSection::InOut},   {"localVars", VarSection::Local},
            {"tempVars", VarSection::Temp},     {"externalVars", VarSection::Global},
            {"globalVars", VarSection::Global},
        };
        if (c->name == "returnType") {
          pou.returnType = typeName(c.get());
        } else if (auto it = kSections.find(c->name); it != kSections.end()) {
          readVariables(*c, it->second, pou.variables);
        } else if (c->name != "addData" && c->name != "documentation") {
          skip(where, *c);
        }
      }
    }
    if (pou.kind == PouKind::Function && !pou.returnType) pou.returnType = "VOID";
    if (pou.kind != PouKind::Function) pou.returnType.reset();

    currentPou_ = &node;
    transitionBodies_.clear();
    if (const XmlNode* transitions = node.child("transitions")) {
      for (const XmlNode* t : transitions->childrenNamed("transition")) {
        transitionBodies_[t->attrOr("name")] = t->child("body");
      }
    }
    if (const XmlNode* actions = node.child("actions")) {
      for (const XmlNode* a : actions->childrenNamed("action")) {
        NamedAction action;
        action.name = a->attrOr("name");
        const XmlNode* body = a->child("body");
        if (!body) throw ParseError("action '" + action.name + "' has no body", a->line, a->column);
        action.body = readBody(*body, pou, where + "/actions/" + action.name);
        pou.actions.push_back(std::move(action));
      }
    }
    if (const XmlNode* body = node.child("body")) {
      pou.body = readBody(*body, pou, where + "/body");
    }
    // Actions synthesized from inline SFC action blocks were appended while
    // reading the body.
    pou.actions.insert(pou.actions.end(), std::make_move_iterator(inlineActions_.begin()),
                       std::make_move_iterator(inlineActions_.end()));
    inlineActions_.clear();
    return pou;
  }

  LanguageBody readBody(const XmlNode& body, const Pou& pou, const std::string& where) {
    for (const auto& c : body.children) {
      if (c->name == "ST") return LanguageBody{parseSt(*c, pou.name)};
      if (c->name == "IL") {
        throw UnsupportedConstructError(
            "IL", "POU '" + pou.name + "' uses Instruction List, which is not supported");
      }
      if (c->name == "SFC") return LanguageBody{readSfc(*c, pou, where)};
      if (c->name == "LD") return LanguageBody{readLd(*c, where)};
      if (c->name == "FBD") return LanguageBody{readFbd(*c, pou.name, where)};
    }
    for (const auto& c : body.children) {
      if (c->name != "addData" && c->name != "documentation") skip(where, *c);
    }
    return LanguageBody{StBody{}};
  }

  static StBody parseSt(const XmlNode& st, const std::string& pouName) {
    try {
      return parseStructuredText(st.allText());
    } catch (const UnsupportedConstructError& e) {
      throw UnsupportedConstructError(e.construct(),
                                      "POU '" + pouName + "': " + std::string(e.what()));
    } catch (const ParseError& e) {
      throw ParseError("POU '" + pouName + "': ST " + std::string(e.what()),
                       st.line + std::max(0, e.line() - 1), e.column());
    }
  }

  static Expression parseExpr(const std::string& text, const XmlNode& at,
                              const std::string& pouName) {
    try {
      return parseExpression(text);
    } catch (const ParseError& e) {
      throw ParseError("POU '" + pouName + "': expression " + std::string(e.what()), at.line,
                       at.column);
    }
  }

  // -------------------------------------------------------------------------
  // SFC
  // -------------------------------------------------------------------------

  SfcBody readSfc(const XmlNode& sfc, const Pou& pou, const std::string& where) {
    SfcBody body;
    std::map<std::string, const XmlNode*> byId;
    std::map<std::string, std::vector<std::string>> preds;
    std::map<std::string, std::vector<std::string>> succs;
    std::vector<const XmlNode*> order;
    for (const auto& c : sfc.children) {
      const XmlNode* e = c.get();
      std::string id = e->attrOr("localId");
      if (!id.empty()) byId[id] = e;
      order.push_back(e);
    }
    for (const XmlNode* e : order) {
      std::string id = e->attrOr("localId");
      for (const Link& l : incomingLinks(*e)) {
        preds[id].push_back(l.sourceId);
        succs[l.sourceId].push_back(id);
      }
    }
    auto isJunction = [](const std::string& n) {
      return n == "selectionDivergence" || n == "selectionConvergence" ||
             n == "simultaneousDivergence" || n == "simultaneousConvergence";
    };

    std::vector<const XmlNode*> actionBlocks;
    for (const XmlNode* e : order) {
      if (e->name == "step") {
        Step s;
        s.name = e->attrOr("name");
        s.initial = e->attrOr("initialStep") == "true";
        body.steps.push_back(std::move(s));
      } else if (e->name == "transition" || e->name == "jumpStep" || isJunction(e->name)) {
        // handled below
      } else if (e->name == "actionBlock") {
        actionBlocks.push_back(e);
      } else if (e->name == "comment" || e->name == "addData" || e->name == "documentation") {
        // layout only
      } else {
        skip(where, *e);
      }
    }

    auto stepIndex = [&](const std::string& id) -> Step* {
      auto it = byId.find(id);
      if (it == byId.end() || it->second->name != "step") return nullptr;
      for (auto& s : body.steps) {
        if (s.name == it->second->attrOr("name")) return &s;
      }
      return nullptr;
    };

    for (const XmlNode* e : order) {
      if (e->name != "transition") continue;
      Transition t;
      std::string id = e->attrOr("localId");
      std::set<std::string> seen;
      std::function<void(const std::string&)> back = [&](const std::string& n) {
        if (!seen.insert("b" + n).second) return;
        auto it = byId.find(n);
        if (it == byId.end()) return;
        if (it->second->name == "step") {
          t.fromSteps.push_back(it->second->attrOr("name"));
        } else if (isJunction(it->second->name)) {
          for (const auto& p : preds[n]) back(p);
        }
      };
      std::function<void(const std::string&)> fwd = [&](const std::string& n) {
        if (!seen.insert("f" + n).second) return;
        auto it = byId.find(n);
        if (it == byId.end()) return;
        const std::string& kind = it->second->name;
        if (kind == "step") {
          t.toSteps.push_back(it->second->attrOr("name"));
        } else if (kind == "jumpStep") {
          t.toSteps.push_back(it->second->attrOr("targetName"));
        } else if (isJunction(kind)) {
          for (const auto& s : succs[n]) fwd(s);
        }
      };
      for (const auto& p : preds[id]) back(p);
      for (const auto& s : succs[id]) fwd(s);

      const XmlNode* cond = e->child("condition");
      if (const XmlNode* inl = cond ? cond->child("inline") : nullptr) {
        const XmlNode* st = inl->descendant("ST");
        if (!st) throw UnsupportedConstructError("IL", "POU '" + pou.name + "': inline transition condition must be ST");
        t.condition = parseExpr(trim(stripTerminator(st->allText())), *st, pou.name);
      } else if (const XmlNode* ref = cond ? cond->child("reference") : nullptr) {
        std::string name = ref->attrOr("name");
        auto it = transitionBodies_.find(name);
        const XmlNode* st = it != transitionBodies_.end() && it->second ? it->second->child("ST") : nullptr;
        std::optional<Expression> parsed;
        if (st) parsed = transitionBodyExpression(st->allText(), name);
        if (parsed) {
          t.condition = std::move(parsed);
        } else {
          t.bodyRef = name;
        }
      } else {
        warn(where, "transition at line " + std::to_string(e->line) +
                        " has a graphical condition; kept as opaque reference");
        t.bodyRef = "connection" + id;
      }
      body.transitions.push_back(std::move(t));
    }

    std::set<std::string> takenNames;
    for (const auto& c : currentPou_->childrenNamed("actions")) {
      for (const XmlNode* a : c->childrenNamed("action")) takenNames.insert(a->attrOr("name"));
    }
    for (const XmlNode* block : actionBlocks) {
      Step* owner = nullptr;
      for (const Link& l : incomingLinks(*block)) {
        if ((owner = stepIndex(l.sourceId))) break;
      }
      if (!owner) {
        warn(where, "action block at line " + std::to_string(block->line) + " is not attached to a step");
        ++report_->skippedElements;
        continue;
      }
      int inlineCount = 0;
      for (const XmlNode* a : block->childrenNamed("action")) {
        ActionAssociation assoc;
        std::string q = a->attrOr("qualifier", "N");
        if (auto parsed = actionQualifierFromString(q)) {
          assoc.qualifier = *parsed;
        } else {
          warn(where, "unknown action qualifier '" + q + "', using N");
        }
        assoc.duration = a->attrOr("duration");
        if (const XmlNode* ref = a->child("reference")) {
          assoc.actionRef = ref->attrOr("name");
        } else if (const XmlNode* inl = a->child("inline")) {
          std::string name;
          do {
            name = owner->name + "_inline" + std::to_string(++inlineCount);
          } while (takenNames.count(name));
          takenNames.insert(name);
          Pou scratch;
          scratch.name = pou.name;
          NamedAction action{name, readBody(*inl, scratch, where + "/actions/" + name)};
          inlineActions_.push_back(std::move(action));
          assoc.actionRef = name;
        } else {
          warn(where, "action without reference or inline body skipped");
          ++report_->skippedElements;
          continue;
        }
        owner->actions.push_back(std::move(assoc));
      }
    }
    return body;
  }

  static std::string stripTerminator(std::string text) {
    std::string t = trim(text);
    while (!t.empty() && t.back() == ';') t.pop_back();
    return t;
  }

  // A transition body "TRANSITION_NAME := expr;" or "TRANSITION := expr;" or a
  // bare expression.
  static std::optional<Expression> transitionBodyExpression(const std::string& text,
                                                            const std::string& name) {
    try {
      StBody st = parseStructuredText(text);
      if (st.statements.size() == 1 && st.statements[0].kind == StatementKind::Assignment &&
          (st.statements[0].target == name || st.statements[0].target == "TRANSITION")) {
        return st.statements[0].value;
      }
    } catch (const ParseError&) {
    }
    try {
      return parseExpression(stripTerminator(text));
    } catch (const ParseError&) {
      return std::nullopt;
    }
  }

  // -------------------------------------------------------------------------
  // LD / FBD networks
  // -------------------------------------------------------------------------

  struct Graph {
    std::vector<const XmlNode*> elements;  // document order, rails and wiring helpers included
    std::map<std::string, std::size_t> indexOf;
    std::map<std::string, std::vector<Link>> incoming;
    std::map<std::string, std::vector<std::string>> connectorSources;  // connector name -> element ids
  };

  Graph buildGraph(const XmlNode& container) {
    Graph g;
    for (const auto& c : container.children) {
      const XmlNode* e = c.get();
      g.indexOf[e->attrOr("localId")] = g.elements.size();
      g.elements.push_back(e);
      g.incoming[e->attrOr("localId")] = incomingLinks(*e);
      if (e->name == "connector") {
        g.connectorSources[e->attrOr("name")].push_back(e->attrOr("localId"));
      }
    }
    return g;
  }

  // Resolves a link source through connector/continuation pairs and, in LD,
  // through coils, so every returned link starts at a modeled element.
  std::vector<Link> resolveSource(const Graph& g, const Link& link, bool passCoils,
                                  int depth = 0) const {
    if (depth > 64) return {};
    auto it = g.indexOf.find(link.sourceId);
    if (it == g.indexOf.end()) return {};
    const XmlNode* src = g.elements[it->second];
    auto through = [&](const std::string& id) {
      std::vector<Link> out;
      auto inc = g.incoming.find(id);
      if (inc == g.incoming.end()) return out;
      for (const Link& l : inc->second) {
        Link next = l;
        next.sinkPort = link.sinkPort;
        auto r = resolveSource(g, next, passCoils, depth + 1);
        out.insert(out.end(), r.begin(), r.end());
      }
      return out;
    };
    if (src->name == "leftPowerRail" || src->name == "rightPowerRail") return {};
    if (src->name == "connector") return through(link.sourceId);
    if (src->name == "continuation") {
      std::vector<Link> out;
      auto cs = g.connectorSources.find(src->attrOr("name"));
      if (cs == g.connectorSources.end()) return out;
      for (const auto& id : cs->second) {
        auto r = through(id);
        out.insert(out.end(), r.begin(), r.end());
      }
      return out;
    }
    if (passCoils && src->name == "coil") return through(link.sourceId);
    return {link};
  }

  struct Component {
    std::vector<std::size_t> members;  // element indices, document order
    std::optional<std::string> label;
  };

  std::vector<Component> components(const Graph& g, const std::set<std::string>& wiringOnly,
                                    const std::string& where, bool passCoils) {
    const std::size_t n = g.elements.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    auto isModeled = [&](const XmlNode* e) {
      return !wiringOnly.count(e->name) && e->name != "label" && e->name != "comment" &&
             e->name != "addData" && e->name != "documentation";
    };
    for (std::size_t i = 0; i < n; ++i) {
      const XmlNode* e = g.elements[i];
      if (!isModeled(e)) continue;
      for (const Link& l : g.incoming.at(e->attrOr("localId"))) {
        for (const Link& r : resolveSource(g, l, passCoils)) {
          auto it = g.indexOf.find(r.sourceId);
          if (it != g.indexOf.end()) parent[find(i)] = find(it->second);
        }
      }
    }
    std::map<std::size_t, std::size_t> compOfRoot;
    std::vector<Component> comps;
    std::vector<std::string> pendingLabels;
    for (std::size_t i = 0; i < n; ++i) {
      const XmlNode* e = g.elements[i];
      if (e->name == "label") {
        pendingLabels.push_back(e->attrOr("label"));
        continue;
      }
      if (!isModeled(e)) continue;
      std::size_t root = find(i);
      auto [it, inserted] = compOfRoot.emplace(root, comps.size());
      if (inserted) comps.emplace_back();
      Component& comp = comps[it->second];
      comp.members.push_back(i);
      for (auto& lbl : pendingLabels) {
        if (comp.label && *comp.label != lbl) {
          warn(where, "network already labeled '" + *comp.label + "', ignoring label '" + lbl + "'");
        } else {
          comp.label = lbl;
        }
      }
      pendingLabels.clear();
    }
    if (!pendingLabels.empty()) {
      if (comps.empty()) comps.emplace_back();
      if (!comps.back().label) comps.back().label = pendingLabels.front();
    }
    return comps;
  }

  static FbdBlock readBlock(const XmlNode& e) {
    FbdBlock b;
    b.typeName = e.attrOr("typeName");
    if (const std::string* inst = e.attr("instanceName")) {
      if (!inst->empty()) b.instanceName = *inst;
    }
    auto ports = [&](const char* section, std::vector<std::string>& out) {
      if (const XmlNode* vars = e.child(section)) {
        for (const XmlNode* v : vars->childrenNamed("variable")) out.push_back(v->attrOr("formalParameter"));
      }
    };
    ports("inputVariables", b.inputPorts);
    ports("inOutVariables", b.inputPorts);
    ports("outputVariables", b.outputPorts);
    ports("inOutVariables", b.outputPorts);
    return b;
  }

  LdBody readLd(const XmlNode& ld, const std::string& where) {
    static const std::set<std::string> kWiring = {"leftPowerRail", "rightPowerRail", "connector",
                                                  "continuation"};
    static const std::set<std::string> kKnown = {"contact", "coil", "block", "inVariable",
                                                 "outVariable", "inOutVariable", "label",
                                                 "comment", "addData", "documentation"};
    Graph g = buildGraph(ld);
    for (const XmlNode* e : g.elements) {
      if (!kWiring.count(e->name) && !kKnown.count(e->name)) skip(where, *e);
    }
    std::set<std::string> wiringOnly = kWiring;
    for (const XmlNode* e : g.elements) {
      if (!kWiring.count(e->name) && !kKnown.count(e->name)) wiringOnly.insert(e->name);
    }
    LdBody body;
    for (const Component& comp : components(g, wiringOnly, where, false)) {
      LdNetwork net;
      net.label = comp.label;
      std::map<std::size_t, std::size_t> localIndex;
      for (std::size_t idx : comp.members) {
        const XmlNode* e = g.elements[idx];
        if (e->name == "contact") {
          localIndex[idx] = net.elements.size();
          net.elements.emplace_back(Contact{trim(childText(*e, "variable")), e->attrOr("negated") == "true"});
        } else if (e->name == "coil") {
          Coil c{trim(childText(*e, "variable")), CoilStorage::Normal};
          std::string storage = e->attrOr("storage");
          if (storage == "set") c.storage = CoilStorage::Set;
          if (storage == "reset") c.storage = CoilStorage::Reset;
          localIndex[idx] = net.elements.size();
          net.elements.emplace_back(std::move(c));
        } else if (e->name == "block") {
          localIndex[idx] = net.elements.size();
          net.elements.emplace_back(readBlock(*e));
        }
      }
      std::set<std::pair<std::size_t, std::size_t>> seen;
      for (std::size_t idx : comp.members) {
        auto sink = localIndex.find(idx);
        if (sink == localIndex.end()) continue;
        for (const Link& l : g.incoming.at(g.elements[idx]->attrOr("localId"))) {
          for (const Link& r : resolveSource(g, l, true)) {
            auto src = localIndex.find(g.indexOf.at(r.sourceId));
            if (src == localIndex.end()) continue;
            std::pair<std::size_t, std::size_t> w{src->second, sink->second};
            if (seen.insert(w).second) net.wiring.push_back(w);
          }
        }
      }
      if (!net.elements.empty() || net.label) body.networks.push_back(std::move(net));
    }
    return body;
  }

  static std::string childText(const XmlNode& e, std::string_view name) {
    const XmlNode* c = e.child(name);
    return c ? c->allText() : std::string();
  }

  FbdBody readFbd(const XmlNode& fbd, const std::string& pouName, const std::string& where) {
    static const std::set<std::string> kWiring = {"connector", "continuation"};
    static const std::set<std::string> kKnown = {"block", "inVariable", "outVariable",
                                                 "inOutVariable", "jump", "label",
                                                 "comment", "addData", "documentation"};
    Graph g = buildGraph(fbd);
    std::set<std::string> wiringOnly = kWiring;
    for (const XmlNode* e : g.elements) {
      if (!kWiring.count(e->name) && !kKnown.count(e->name)) {
        skip(where, *e);
        wiringOnly.insert(e->name);
      }
    }
    FbdBody body;
    for (const Component& comp : components(g, wiringOnly, where, false)) {
      FbdNetwork net;
      net.label = comp.label;
      std::map<std::size_t, PortRef> refOf;
      for (std::size_t idx : comp.members) {
        const XmlNode* e = g.elements[idx];
        if (e->name == "block") {
          refOf[idx] = PortRef{PortRef::Kind::Block, net.blocks.size(), {}};
          net.blocks.push_back(readBlock(*e));
          if (const XmlNode* st = e->descendant("ST")) {
            if (net.nestedSt) {
              warn(where, "network has more than one nested ST body; keeping the first");
            } else {
              net.nestedSt = parseSt(*st, pouName);
            }
          }
        } else if (e->name == "inVariable" || e->name == "outVariable" || e->name == "inOutVariable") {
          refOf[idx] = PortRef{PortRef::Kind::Endpoint, net.endpoints.size(), {}};
          const XmlNode* exprNode = e->child("expression");
          std::string text = trim(exprNode ? exprNode->allText() : std::string());
          if (text.empty()) throw ParseError("POU '" + pouName + "': variable element without expression", e->line, e->column);
          net.endpoints.push_back(parseExpr(text, *e, pouName));
        } else if (e->name == "jump") {
          net.jumps.push_back(e->attrOr("label"));
        }
      }
      for (std::size_t idx : comp.members) {
        auto sink = refOf.find(idx);
        if (sink == refOf.end()) continue;
        for (const Link& l : g.incoming.at(g.elements[idx]->attrOr("localId"))) {
          for (const Link& r : resolveSource(g, l, false)) {
            auto src = refOf.find(g.indexOf.at(r.sourceId));
            if (src == refOf.end()) continue;
            FbdConnection c;
            c.source = src->second;
            if (c.source.kind == PortRef::Kind::Block) c.source.port = r.sourcePort;
            c.sink = sink->second;
            if (c.sink.kind == PortRef::Kind::Block) c.sink.port = l.sinkPort;
            net.connections.push_back(std::move(c));
          }
        }
      }
      // Sink order, independent of how elements interleave in the document.
      std::stable_sort(net.connections.begin(), net.connections.end(),
                       [](const FbdConnection& a, const FbdConnection& b) {
                         return std::make_pair(a.sink.kind, a.sink.index) <
                                std::make_pair(b.sink.kind, b.sink.index);
                       });
      body.networks.push_back(std::move(net));
    }
    std::set<std::string> labels;
    for (const auto& n : body.networks) {
      if (n.label) labels.insert(*n.label);
    }
    for (auto& n : body.networks) {
      auto bad = std::remove_if(n.jumps.begin(), n.jumps.end(), [&](const std::string& j) {
        if (labels.count(j)) return false;
        warn(where, "jump to unknown label '" + j + "' dropped");
        return true;
      });
      n.jumps.erase(bad, n.jumps.end());
    }
    return body;
  }

  ParseReport* report_ = nullptr;
  const XmlNode* currentPou_ = nullptr;
  std::map<std::string, const XmlNode*> transitionBodies_;
  std::vector<NamedAction> inlineActions_;
};

}  // namespace

ParsedProject parseProject(std::string_view xml) {
  auto root = parseXml(xml);
  return ProjectReader().read(*root);
}

ParsedProject loadProject(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parseProject(buf.str());
  } catch (const UnsupportedConstructError& e) {
    throw UnsupportedConstructError(e.construct(), path + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace iecclone
