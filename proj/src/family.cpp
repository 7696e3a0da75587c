#include "iecclone/family.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace iecclone {

using ojson = nlohmann::ordered_json;

std::string_view toString(Category category) {
  switch (category) {
    case Category::Mandatory: return "mandatory";
    case Category::Alternative: return "alternative";
    case Category::Optional: return "optional";
  }
  return "?";
}

std::string_view toString(Origin origin) {
  switch (origin) {
    case Origin::Both: return "both";
    case Origin::LeftOnly: return "leftOnly";
    case Origin::RightOnly: return "rightOnly";
  }
  return "?";
}

std::string_view toString(CloneLabel label) {
  switch (label) {
    case CloneLabel::Identical: return "identical";
    case CloneLabel::RenamedOnly: return "renamedOnly";
    case CloneLabel::Structural: return "structural";
  }
  return "?";
}

namespace {

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string pairName(const ArtifactRef& left, const ArtifactRef& right) {
  std::string l = describe(left);
  std::string r = describe(right);
  return l == r ? l : l + " => " + r;
}

FmNode buildPair(const ArtifactPairNode& node, const ArtifactRef& left, const ArtifactRef& right,
                 const ArtifactPath& leftPath, const ArtifactPath& rightPath, double lambda) {
  FmNode fm;
  fm.name = pairName(left, right);
  fm.type = std::string(toString(node.type));
  fm.origin = Origin::Both;
  fm.similarity = node.similarity;
  fm.category = node.similarity >= lambda ? Category::Mandatory : Category::Alternative;
  fm.leftPath = leftPath.toString();
  fm.rightPath = rightPath.toString();
  for (const auto& o : node.options) {
    if (o.vacuous) continue;
    std::vector<const ArtifactPairNode*> byLeft(o.leftItems.size(), nullptr);
    std::vector<bool> rightUsed(o.rightItems.size());
    for (const auto& p : o.pairs) {
      if (!p.selected) continue;
      byLeft[p.leftIndex] = &p;
      rightUsed[p.rightIndex] = true;
    }
    for (std::size_t i = 0; i < o.leftItems.size(); ++i) {
      const ChildEntry& l = o.leftItems[i];
      if (const ArtifactPairNode* p = byLeft[i]) {
        const ChildEntry& r = o.rightItems[p->rightIndex];
        fm.children.push_back(buildPair(*p, l.ref, r.ref, leftPath.child(l.segment),
                                        rightPath.child(r.segment), lambda));
      } else {
        FmNode leaf;
        leaf.name = describe(l.ref);
        leaf.type = std::string(toString(typeOf(l.ref)));
        leaf.category = Category::Optional;
        leaf.origin = Origin::LeftOnly;
        leaf.leftPath = leftPath.child(l.segment).toString();
        fm.children.push_back(std::move(leaf));
      }
    }
    for (std::size_t j = 0; j < o.rightItems.size(); ++j) {
      if (rightUsed[j]) continue;
      const ChildEntry& r = o.rightItems[j];
      FmNode leaf;
      leaf.name = describe(r.ref);
      leaf.type = std::string(toString(typeOf(r.ref)));
      leaf.category = Category::Optional;
      leaf.origin = Origin::RightOnly;
      leaf.rightPath = rightPath.child(r.segment).toString();
      fm.children.push_back(std::move(leaf));
    }
  }
  return fm;
}

std::string_view marker(Category c) {
  switch (c) {
    case Category::Mandatory: return "!";
    case Category::Alternative: return "<->";
    case Category::Optional: return "?";
  }
  return "";
}

void emitText(const FmNode& n, int depth, std::ostringstream& out) {
  out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << marker(n.category) << ' '
      << n.name;
  if (n.origin == Origin::Both) {
    out << " [" << fixed4(n.similarity) << "]";
  } else {
    out << " (" << (n.origin == Origin::LeftOnly ? "left only" : "right only") << ")";
  }
  out << '\n';
  for (const auto& c : n.children) emitText(c, depth + 1, out);
}

std::string dotEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

void emitDot(const FmNode& n, std::size_t& next, std::ostringstream& out) {
  const std::size_t id = next++;
  std::string style;
  switch (n.category) {
    case Category::Mandatory: style = "color=black"; break;
    case Category::Alternative: style = "color=orange"; break;
    case Category::Optional: style = "color=blue, style=dashed"; break;
  }
  std::string label = dotEscape(std::string(marker(n.category)) + " " + n.name);
  if (n.origin == Origin::Both) label += "\\n" + fixed4(n.similarity);
  out << "  n" << id << " [label=\"" << label << "\", " << style << "];\n";
  for (const auto& c : n.children) {
    std::size_t child = next;
    emitDot(c, next, out);
    out << "  n" << id << " -> n" << child << ";\n";
  }
}

ojson nodeToJson(const FmNode& n) {
  ojson j;
  j["name"] = n.name;
  j["type"] = n.type;
  j["category"] = std::string(toString(n.category));
  j["origin"] = std::string(toString(n.origin));
  j["similarity"] = round4(n.similarity);
  j["left"] = n.leftPath ? ojson(*n.leftPath) : ojson(nullptr);
  j["right"] = n.rightPath ? ojson(*n.rightPath) : ojson(nullptr);
  j["children"] = ojson::array();
  for (const auto& c : n.children) j["children"].push_back(nodeToJson(c));
  return j;
}

FmNode nodeFromJson(const ojson& j) {
  FmNode n;
  n.name = j.at("name").get<std::string>();
  n.type = j.at("type").get<std::string>();
  std::string category = j.at("category").get<std::string>();
  if (category == "mandatory") n.category = Category::Mandatory;
  else if (category == "alternative") n.category = Category::Alternative;
  else if (category == "optional") n.category = Category::Optional;
  else throw FamilyModelError("unknown category '" + category + "'");
  std::string origin = j.at("origin").get<std::string>();
  if (origin == "both") n.origin = Origin::Both;
  else if (origin == "leftOnly") n.origin = Origin::LeftOnly;
  else if (origin == "rightOnly") n.origin = Origin::RightOnly;
  else throw FamilyModelError("unknown origin '" + origin + "'");
  n.similarity = j.at("similarity").get<double>();
  if (!j.at("left").is_null()) n.leftPath = j.at("left").get<std::string>();
  if (!j.at("right").is_null()) n.rightPath = j.at("right").get<std::string>();
  for (const auto& c : j.at("children")) n.children.push_back(nodeFromJson(c));
  return n;
}

void checkNode(const FmNode& n, double lambda, std::vector<std::string>& out, bool isRoot) {
  const bool both = n.origin == Origin::Both;
  if ((n.category == Category::Optional) == both) {
    out.push_back(n.name + ": category " + std::string(toString(n.category)) +
                  " inconsistent with origin " + std::string(toString(n.origin)));
  }
  if (n.category == Category::Mandatory && !(n.similarity >= lambda)) {
    out.push_back(n.name + ": mandatory below lambda");
  }
  if (n.category == Category::Alternative &&
      !(n.similarity < lambda && (isRoot || n.similarity > 0.0))) {
    out.push_back(n.name + ": alternative outside (0, lambda)");
  }
  if (n.similarity < 0.0 || n.similarity > 1.0) out.push_back(n.name + ": similarity out of range");
  for (const auto& c : n.children) checkNode(c, lambda, out, false);
}

// True when every difference below the pair stems from identifier attributes.
bool onlyNameDifferences(const ArtifactPairNode& node) {
  for (const auto& a : node.attributes) {
    if (a.similarity < 1.0 && !attributeCatalog()[a.attribute].nameAttribute) return false;
  }
  for (const auto& o : node.options) {
    if (!o.unmatchedLeft().empty() || !o.unmatchedRight().empty()) return false;
    for (const auto& p : o.pairs) {
      if (p.selected && !onlyNameDifferences(p)) return false;
    }
  }
  return true;
}

CloneCandidate candidateFor(const ArtifactPairNode& node, ArtifactPath left, ArtifactPath right) {
  CloneCandidate c;
  c.leftPou = std::move(left);
  c.rightPou = std::move(right);
  c.similarity = node.similarity;
  if (node.similarity >= 1.0) {
    c.label = CloneLabel::Identical;
  } else if (onlyNameDifferences(node)) {
    c.label = CloneLabel::RenamedOnly;
  } else {
    c.label = CloneLabel::Structural;
  }
  return c;
}

}  // namespace

FamilyModel buildFamilyModel(const SimilarityTree& tree, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw FamilyModelError("lambda must lie in (0, 1], got " + std::to_string(lambda));
  }
  FamilyModel fm;
  fm.lambda = lambda;
  fm.root = buildPair(tree.root, tree.leftRoot, tree.rightRoot, tree.leftPath, tree.rightPath,
                      lambda);
  return fm;
}

std::optional<ReportFormat> reportFormatFromString(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "text") return ReportFormat::Text;
  if (name == "dot") return ReportFormat::Dot;
  return std::nullopt;
}

std::string emitReport(const FamilyModel& model, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: {
      ojson j;
      j["lambda"] = round4(model.lambda);
      j["root"] = nodeToJson(model.root);
      return j.dump(2) + "\n";
    }
    case ReportFormat::Text: {
      std::ostringstream out;
      out << "family model (lambda " << fixed4(model.lambda) << ")\n";
      emitText(model.root, 0, out);
      return out.str();
    }
    case ReportFormat::Dot: {
      std::ostringstream out;
      out << "digraph family_model {\n  node [shape=box];\n";
      out << "  label=\"lambda " << fixed4(model.lambda) << "\";\n";
      std::size_t next = 0;
      emitDot(model.root, next, out);
      out << "}\n";
      return out.str();
    }
  }
  throw FamilyModelError("unknown report format");
}

FamilyModel parseFamilyModelJson(std::string_view document) {
  try {
    ojson j = ojson::parse(document);
    FamilyModel fm;
    fm.lambda = j.at("lambda").get<double>();
    fm.root = nodeFromJson(j.at("root"));
    return fm;
  } catch (const nlohmann::json::exception& e) {
    throw FamilyModelError(std::string("malformed family model document: ") + e.what());
  }
}

std::vector<std::string> checkFamilyModel(const FamilyModel& model) {
  std::vector<std::string> out;
  checkNode(model.root, model.lambda, out, true);
  return out;
}

std::vector<CloneCandidate> classifyClones(const std::vector<SimilarityTree>& results,
                                           double threshold) {
  std::vector<CloneCandidate> out;
  for (const auto& tree : results) {
    if (tree.root.type == ArtifactType::Pou) {
      if (tree.root.similarity >= threshold) {
        out.push_back(candidateFor(tree.root, tree.leftPath, tree.rightPath));
      }
      continue;
    }
    for (const auto& o : tree.root.options) {
      if (o.type != ArtifactType::Pou) continue;
      for (const auto& p : o.pairs) {
        if (!p.selected || p.similarity < threshold) continue;
        out.push_back(candidateFor(p, tree.leftPath.child(o.leftItems[p.leftIndex].segment),
                                   tree.rightPath.child(o.rightItems[p.rightIndex].segment)));
      }
    }
  }
  return out;
}

}  // namespace iecclone
