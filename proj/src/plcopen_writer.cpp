#include <fstream>
#include <map>
#include <type_traits>
#include <variant>
#include <set>
#include <sstream>

#include "iecclone/plcopen.hpp"

namespace iecclone {

namespace {

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const std::set<std::string>& elementaryTypes() {
  static const std::set<std::string> kTypes = {
      "BOOL", "BYTE", "WORD",  "DWORD", "LWORD", "SINT", "INT",  "DINT", "LINT",
      "USINT", "UINT", "UDINT", "ULINT", "REAL", "LREAL", "TIME", "LTIME", "DATE",
      "DT", "TOD", "DATE_AND_TIME", "TIME_OF_DAY", "CHAR", "WCHAR",
  };
  return kTypes;
}

class Writer {
 public:
  std::string run(const Project& p) {
    line(0, R"(<?xml version="1.0" encoding="UTF-8"?>)");
    line(0, R"(<project xmlns="http://www.plcopen.org/xml/tc6_0201">)");
    line(1, R"(<fileHeader companyName="iecclone" productName="iecclone" productVersion="1" creationDateTime="1970-01-01T00:00:00"/>)");
    line(1, "<contentHeader name=\"" + escape(p.name) + "\">");
    line(2, "<coordinateInfo><fbd><scaling x=\"1\" y=\"1\"/></fbd><ld><scaling x=\"1\" y=\"1\"/></ld>"
            "<sfc><scaling x=\"1\" y=\"1\"/></sfc></coordinateInfo>");
    line(1, "</contentHeader>");
    line(1, "<types>");
    line(2, "<dataTypes>");
    for (const auto& [key, value] : p.metadata) {
      if (key == "dataType") line(3, "<dataType name=\"" + escape(value) + "\"><baseType/></dataType>");
    }
    line(2, "</dataTypes>");
    line(2, "<pous>");
    for (const auto& pou : p.pous) writePou(pou);
    line(2, "</pous>");
    line(1, "</types>");
    writeInstances(p);
    line(0, "</project>");
    return std::move(out_);
  }

 private:
  void line(int depth, std::string_view text) {
    out_.append(static_cast<std::size_t>(depth) * 2, ' ');
    out_ += text;
    out_ += '\n';
  }

  std::string id() { return std::to_string(++nextId_); }

  static std::string typeXml(const std::string& type) {
    if (type.rfind("ARRAY[", 0) == 0) {
      auto close = type.find(']');
      auto of = type.find(" OF ", close);
      if (close != std::string::npos && of != std::string::npos) {
        std::string dims;
        std::stringstream ranges(type.substr(6, close - 6));
        std::string range;
        while (std::getline(ranges, range, ',')) {
          auto dots = range.find("..");
          dims += "<dimension lower=\"" + escape(range.substr(0, dots)) + "\" upper=\"" +
                  escape(dots == std::string::npos ? "" : range.substr(dots + 2)) + "\"/>";
        }
        return "<array>" + dims + "<baseType>" + typeXml(type.substr(of + 4)) + "</baseType></array>";
      }
    }
    if (type.rfind("POINTER TO ", 0) == 0) {
      return "<pointer><baseType>" + typeXml(type.substr(11)) + "</baseType></pointer>";
    }
    for (const char* base : {"STRING", "WSTRING"}) {
      std::string b = base;
      if (type == b) return "<" + std::string(b == "STRING" ? "string" : "wstring") + "/>";
      if (type.rfind(b + "(", 0) == 0 && type.back() == ')') {
        std::string len = type.substr(b.size() + 1, type.size() - b.size() - 2);
        return "<" + std::string(b == "STRING" ? "string" : "wstring") + " length=\"" +
               escape(len) + "\"/>";
      }
    }
    if (elementaryTypes().count(type)) return "<" + type + "/>";
    return "<derived name=\"" + escape(type) + "\"/>";
  }

  void writeVariable(int depth, const VariableDecl& v) {
    line(depth, "<variable name=\"" + escape(v.name) + "\">");
    line(depth + 1, "<type>" + typeXml(v.dataType) + "</type>");
    if (v.initialValue) {
      line(depth + 1, "<initialValue><simpleValue value=\"" + escape(*v.initialValue) +
                          "\"/></initialValue>");
    }
    line(depth, "</variable>");
  }

  static std::string_view sectionTag(VarSection s) {
    switch (s) {
      case VarSection::Input: return "inputVars";
      case VarSection::Output: return "outputVars";
      case VarSection::InOut: return "inOutVars";
      case VarSection::Local: return "localVars";
      case VarSection::Temp: return "tempVars";
      case VarSection::Global: return "externalVars";
    }
    return "localVars";
  }

  void writePou(const Pou& pou) {
    std::string kind = pou.kind == PouKind::Function        ? "function"
                       : pou.kind == PouKind::FunctionBlock ? "functionBlock"
                                                            : "program";
    line(3, "<pou name=\"" + escape(pou.name) + "\" pouType=\"" + kind + "\">");
    line(4, "<interface>");
    if (pou.kind == PouKind::Function && pou.returnType) {
      line(5, "<returnType>" + typeXml(*pou.returnType) + "</returnType>");
    }
    // Consecutive runs keep the declaration order.
    for (std::size_t i = 0; i < pou.variables.size();) {
      VarSection s = pou.variables[i].section;
      std::string tag(sectionTag(s));
      line(5, "<" + tag + ">");
      for (; i < pou.variables.size() && pou.variables[i].section == s; ++i) {
        writeVariable(6, pou.variables[i]);
      }
      line(5, "</" + tag + ">");
    }
    line(4, "</interface>");
    if (!pou.actions.empty()) {
      line(4, "<actions>");
      for (const auto& a : pou.actions) {
        line(5, "<action name=\"" + escape(a.name) + "\">");
        writeBody(6, a.body);
        line(5, "</action>");
      }
      line(4, "</actions>");
    }
    writeBody(4, pou.body);
    line(3, "</pou>");
  }

  void writeSt(int depth, const std::string& text) {
    line(depth, "<ST><xhtml xmlns=\"http://www.w3.org/1999/xhtml\">" + escape(text) +
                    "</xhtml></ST>");
  }

  void writeBody(int depth, const LanguageBody& body) {
    line(depth, "<body>");
    std::visit(
        [&](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, StBody>) {
            writeSt(depth + 1, printStructuredText(b));
          } else if constexpr (std::is_same_v<T, SfcBody>) {
            writeSfc(depth + 1, b);
          } else if constexpr (std::is_same_v<T, LdBody>) {
            writeLd(depth + 1, b);
          } else {
            writeFbd(depth + 1, b);
          }
        },
        body.content);
    line(depth, "</body>");
  }

  static std::string connection(const std::string& ref, const std::string& formal = {}) {
    std::string s = "<connection refLocalId=\"" + ref + "\"";
    if (!formal.empty()) s += " formalParameter=\"" + escape(formal) + "\"";
    return s + "/>";
  }

  void writeSfc(int depth, const SfcBody& sfc) {
    line(depth, "<SFC>");
    std::map<std::string, std::string> stepId;
    for (const auto& s : sfc.steps) {
      std::string sid = id();
      stepId[s.name] = sid;
      line(depth + 1, "<step localId=\"" + sid + "\" name=\"" + escape(s.name) + "\"" +
                          (s.initial ? " initialStep=\"true\"" : "") + ">");
      line(depth + 2, "<connectionPointOut/>");
      line(depth + 1, "</step>");
    }
    for (const auto& t : sfc.transitions) {
      std::string tid = id();
      line(depth + 1, "<transition localId=\"" + tid + "\">");
      std::string in;
      for (const auto& from : t.fromSteps) {
        auto it = stepId.find(from);
        if (it != stepId.end()) in += connection(it->second);
      }
      line(depth + 2, "<connectionPointIn>" + in + "</connectionPointIn>");
      line(depth + 2, "<connectionPointOut/>");
      if (t.condition) {
        line(depth + 2, "<condition><inline name=\"cond" + tid + "\">");
        writeSt(depth + 3, printExpression(*t.condition));
        line(depth + 2, "</inline></condition>");
      } else {
        line(depth + 2, "<condition><reference name=\"" + escape(t.bodyRef) + "\"/></condition>");
      }
      line(depth + 1, "</transition>");
      for (const auto& to : t.toSteps) {
        line(depth + 1, "<jumpStep localId=\"" + id() + "\" targetName=\"" + escape(to) +
                            "\"><connectionPointIn>" + connection(tid) +
                            "</connectionPointIn></jumpStep>");
      }
    }
    for (const auto& s : sfc.steps) {
      if (s.actions.empty()) continue;
      line(depth + 1, "<actionBlock localId=\"" + id() + "\">");
      line(depth + 2, "<connectionPointIn>" + connection(stepId[s.name]) + "</connectionPointIn>");
      for (const auto& a : s.actions) {
        std::string attrs = " qualifier=\"" + std::string(toString(a.qualifier)) + "\"";
        if (!a.duration.empty()) attrs += " duration=\"" + escape(a.duration) + "\"";
        line(depth + 2, "<action localId=\"" + id() + "\"" + attrs + "><reference name=\"" +
                            escape(a.actionRef) + "\"/></action>");
      }
      line(depth + 1, "</actionBlock>");
    }
    line(depth, "</SFC>");
  }

  // Ports named in both lists are in/out ports.
  void writeBlock(int depth, const FbdBlock& b, const std::string& bid,
                  const std::map<std::string, std::string>& portIn, const std::string& directIn,
                  const std::string& addData) {
    std::string head = "<block localId=\"" + bid + "\" typeName=\"" + escape(b.typeName) + "\"";
    if (b.instanceName) head += " instanceName=\"" + escape(*b.instanceName) + "\"";
    line(depth, head + ">");
    if (!directIn.empty()) line(depth + 1, "<connectionPointIn>" + directIn + "</connectionPointIn>");
    std::set<std::string> outs(b.outputPorts.begin(), b.outputPorts.end());
    std::set<std::string> ins(b.inputPorts.begin(), b.inputPorts.end());
    auto in = [&](const std::string& port) {
      auto it = portIn.find(port);
      return "<variable formalParameter=\"" + escape(port) + "\"><connectionPointIn>" +
             (it == portIn.end() ? std::string() : it->second) + "</connectionPointIn></variable>";
    };
    line(depth + 1, "<inputVariables>");
    for (const auto& p : b.inputPorts) {
      if (!outs.count(p)) line(depth + 2, in(p));
    }
    line(depth + 1, "</inputVariables>");
    line(depth + 1, "<inOutVariables>");
    for (const auto& p : b.inputPorts) {
      if (outs.count(p)) line(depth + 2, in(p));
    }
    line(depth + 1, "</inOutVariables>");
    line(depth + 1, "<outputVariables>");
    for (const auto& p : b.outputPorts) {
      if (!ins.count(p)) {
        line(depth + 2, "<variable formalParameter=\"" + escape(p) +
                            "\"><connectionPointOut/></variable>");
      }
    }
    line(depth + 1, "</outputVariables>");
    if (!addData.empty()) line(depth + 1, addData);
    line(depth, "</block>");
  }

  void writeLd(int depth, const LdBody& ld) {
    line(depth, "<LD>");
    for (const auto& net : ld.networks) {
      if (net.label) line(depth + 1, "<label localId=\"" + id() + "\" label=\"" + escape(*net.label) + "\"/>");
      std::string rail = id();
      line(depth + 1, "<leftPowerRail localId=\"" + rail + "\"><connectionPointOut formalParameter=\"\"/></leftPowerRail>");
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < net.elements.size(); ++i) ids.push_back(id());
      for (std::size_t i = 0; i < net.elements.size(); ++i) {
        std::string in;
        for (const auto& [from, to] : net.wiring) {
          if (to != i) continue;
          const bool fromBlock = std::holds_alternative<FbdBlock>(net.elements[from]);
          const auto& outs = fromBlock ? std::get<FbdBlock>(net.elements[from]).outputPorts
                                       : std::vector<std::string>{};
          in += connection(ids[from], outs.empty() ? "" : outs.front());
        }
        if (in.empty()) in = connection(rail);
        std::visit(
            [&](const auto& e) {
              using T = std::decay_t<decltype(e)>;
              if constexpr (std::is_same_v<T, Contact>) {
                line(depth + 1, "<contact localId=\"" + ids[i] + "\"" +
                                    (e.negated ? " negated=\"true\"" : "") + ">");
                line(depth + 2, "<connectionPointIn>" + in + "</connectionPointIn>");
                line(depth + 2, "<connectionPointOut/>");
                line(depth + 2, "<variable>" + escape(e.variable) + "</variable>");
                line(depth + 1, "</contact>");
              } else if constexpr (std::is_same_v<T, Coil>) {
                std::string storage = e.storage == CoilStorage::Set     ? " storage=\"set\""
                                      : e.storage == CoilStorage::Reset ? " storage=\"reset\""
                                                                        : "";
                line(depth + 1, "<coil localId=\"" + ids[i] + "\"" + storage + ">");
                line(depth + 2, "<connectionPointIn>" + in + "</connectionPointIn>");
                line(depth + 2, "<connectionPointOut/>");
                line(depth + 2, "<variable>" + escape(e.variable) + "</variable>");
                line(depth + 1, "</coil>");
              } else {
                writeBlock(depth + 1, e, ids[i], {}, in, {});
              }
            },
            net.elements[i]);
      }
    }
    line(depth, "</LD>");
  }

  void writeFbd(int depth, const FbdBody& fbd) {
    line(depth, "<FBD>");
    for (const auto& net : fbd.networks) {
      if (net.label) line(depth + 1, "<label localId=\"" + id() + "\" label=\"" + escape(*net.label) + "\"/>");
      std::vector<std::string> blockIds, endpointIds;
      for (std::size_t i = 0; i < net.blocks.size(); ++i) blockIds.push_back(id());
      for (std::size_t i = 0; i < net.endpoints.size(); ++i) endpointIds.push_back(id());
      auto sourceOf = [&](const PortRef& r) {
        return r.kind == PortRef::Kind::Block ? connection(blockIds.at(r.index), r.port)
                                              : connection(endpointIds.at(r.index));
      };
      std::size_t nestedAt = net.blocks.size();
      if (net.nestedSt) {
        nestedAt = 0;
        for (std::size_t i = 0; i < net.blocks.size(); ++i) {
          if (net.blocks[i].typeName == "EXECUTE") {
            nestedAt = i;
            break;
          }
        }
      }
      for (std::size_t i = 0; i < net.blocks.size(); ++i) {
        const FbdBlock& b = net.blocks[i];
        std::set<std::string> declared(b.inputPorts.begin(), b.inputPorts.end());
        std::map<std::string, std::string> portIn;
        std::string direct;
        for (const auto& c : net.connections) {
          if (c.sink.kind != PortRef::Kind::Block || c.sink.index != i) continue;
          if (declared.count(c.sink.port)) {
            portIn[c.sink.port] += sourceOf(c.source);
          } else {
            direct += sourceOf(c.source);
          }
        }
        std::string addData;
        if (i == nestedAt) {
          addData = "<addData><data name=\"http://www.3s-software.com/plcopenxml/stcode\" "
                    "handleUnknown=\"implementation\"><ST><xhtml xmlns=\"http://www.w3.org/1999/xhtml\">" +
                    escape(printStructuredText(*net.nestedSt)) + "</xhtml></ST></data></addData>";
        }
        writeBlock(depth + 1, b, blockIds[i], portIn, direct, addData);
      }
      for (std::size_t i = 0; i < net.endpoints.size(); ++i) {
        std::string in;
        bool isSource = false;
        for (const auto& c : net.connections) {
          if (c.sink.kind == PortRef::Kind::Endpoint && c.sink.index == i) in += sourceOf(c.source);
          if (c.source.kind == PortRef::Kind::Endpoint && c.source.index == i) isSource = true;
        }
        std::string tag = in.empty() ? "inVariable" : isSource ? "inOutVariable" : "outVariable";
        line(depth + 1, "<" + tag + " localId=\"" + endpointIds[i] + "\">");
        if (!in.empty()) line(depth + 2, "<connectionPointIn>" + in + "</connectionPointIn>");
        if (tag != "outVariable") line(depth + 2, "<connectionPointOut/>");
        line(depth + 2, "<expression>" + escape(printExpression(net.endpoints[i])) + "</expression>");
        line(depth + 1, "</" + tag + ">");
      }
      std::string anchor = !blockIds.empty() ? blockIds.front()
                           : !endpointIds.empty() ? endpointIds.front() : std::string();
      for (const auto& j : net.jumps) {
        std::string in = anchor.empty() ? "" : "<connectionPointIn>" + connection(anchor) + "</connectionPointIn>";
        line(depth + 1, "<jump localId=\"" + id() + "\" label=\"" + escape(j) + "\">" + in + "</jump>");
      }
    }
    line(depth, "</FBD>");
  }

  void writeInstances(const Project& p) {
    using Instance = std::pair<std::string, std::string>;
    struct Task {
      std::string name;
      std::vector<Instance> instances;
    };
    struct Resource {
      std::string name;
      std::vector<Instance> instances;  // before the first task
      std::vector<Task> tasks;
    };
    struct Config {
      std::string name;
      std::vector<Resource> resources;
    };
    std::vector<Config> configs;
    for (const auto& [key, value] : p.metadata) {
      if (key == "configuration") {
        configs.push_back({value, {}});
        continue;
      }
      if (key != "resource" && key != "task" && key != "pouInstance") continue;
      if (configs.empty()) configs.push_back({"Config", {}});
      auto& resources = configs.back().resources;
      if (key == "resource") {
        resources.push_back({value, {}, {}});
        continue;
      }
      if (resources.empty()) resources.push_back({"Resource", {}, {}});
      Resource& r = resources.back();
      if (key == "task") {
        r.tasks.push_back({value, {}});
        continue;
      }
      auto colon = value.find(':');
      Instance inst{value.substr(0, colon),
                    colon == std::string::npos ? "" : value.substr(colon + 1)};
      (r.tasks.empty() ? r.instances : r.tasks.back().instances).push_back(std::move(inst));
    }
    if (configs.empty() && !p.globalVariables.empty()) configs.push_back({"Config", {}});
    auto instanceLine = [&](int depth, const Instance& i) {
      line(depth, "<pouInstance name=\"" + escape(i.first) + "\" typeName=\"" + escape(i.second) + "\"/>");
    };
    line(1, "<instances>");
    line(2, "<configurations>");
    for (std::size_t c = 0; c < configs.size(); ++c) {
      line(3, "<configuration name=\"" + escape(configs[c].name) + "\">");
      for (const auto& r : configs[c].resources) {
        line(4, "<resource name=\"" + escape(r.name) + "\">");
        for (const auto& t : r.tasks) {
          line(5, "<task name=\"" + escape(t.name) + "\" priority=\"0\" interval=\"T#10ms\">");
          for (const auto& i : t.instances) instanceLine(6, i);
          line(5, "</task>");
        }
        for (const auto& i : r.instances) instanceLine(5, i);
        line(4, "</resource>");
      }
      if (c == 0 && !p.globalVariables.empty()) {
        line(4, "<globalVars>");
        for (const auto& v : p.globalVariables) writeVariable(5, v);
        line(4, "</globalVars>");
      }
      line(3, "</configuration>");
    }
    line(2, "</configurations>");
    line(1, "</instances>");
  }

  std::string out_;
  std::size_t nextId_ = 0;
};

}  // namespace

std::string writeProject(const Project& project) { return Writer().run(project); }

void saveProject(const Project& project, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << writeProject(project);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace iecclone
