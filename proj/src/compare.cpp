#include "iecclone/compare.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <thread>

#include "iecclone/matching.hpp"
#include <nlohmann/json.hpp>

namespace iecclone {

std::string_view AttributeNode::id() const { return attributeCatalog().at(attribute).id; }

std::vector<std::size_t> OptionNode::unmatchedLeft() const {
  std::vector<bool> used(leftItems.size());
  for (const auto& p : pairs) {
    if (p.selected) used[p.leftIndex] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> OptionNode::unmatchedRight() const {
  std::vector<bool> used(rightItems.size());
  for (const auto& p : pairs) {
    if (p.selected) used[p.rightIndex] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) out.push_back(i);
  }
  return out;
}

double ArtifactPairNode::ownSimilarity(bool weighted) const {
  double num = 0.0, den = 0.0;
  for (const auto& a : attributes) {
    double w = weighted ? a.weight : 1.0;
    num += w * a.similarity;
    den += w;
  }
  return den > 0.0 ? num / den : 1.0;
}

std::size_t PairCounts::totalPairs() const {
  std::size_t n = 0;
  for (const auto& [type, count] : pairs) n += count;
  return n;
}

PairCounts& PairCounts::operator+=(const PairCounts& other) {
  for (const auto& [type, count] : other.pairs) pairs[type] += count;
  attributeEvaluations += other.attributeEvaluations;
  crossLanguage += other.crossLanguage;
  return *this;
}

namespace {

constexpr std::size_t kTypeCount = 16;

// Metric with nesting pointers resolved to direct links.
struct CompiledOption {
  struct Child {
    const CompiledOption* target = nullptr;
    ArtifactType type = ArtifactType::Pou;
    double weight = 1.0;
  };
  ArtifactType type = ArtifactType::Pou;
  std::vector<std::pair<std::size_t, double>> attributes;
  std::vector<Child> children;
};

class CompiledMetric {
 public:
  CompiledMetric(const Metric& metric, const MetricOption& root) : metric_(metric) {
    root_ = compile(root);
  }

  const CompiledOption& root() const { return *root_; }

 private:
  const CompiledOption* compile(const MetricOption& option) {
    if (option.nestedRef) {
      auto found = bySubMetric_.find(*option.nestedRef);
      if (found != bySubMetric_.end()) return found->second;
      const MetricOption& target = metric_.resolve(option);
      CompiledOption& node = nodes_.emplace_back();
      bySubMetric_[*option.nestedRef] = &node;
      fill(node, target);
      return &node;
    }
    CompiledOption& node = nodes_.emplace_back();
    fill(node, option);
    return &node;
  }

  void fill(CompiledOption& node, const MetricOption& option) {
    node.type = option.type;
    for (const auto& a : option.attributes) {
      auto idx = attributeIndex(a.id);
      if (!idx) {
        throw MetricValidationError(MetricValidationError::Kind::UnknownAttribute, a.id,
                                    "unknown attribute");
      }
      node.attributes.emplace_back(*idx, a.weight);
    }
    for (const auto& sub : option.options) {
      node.children.push_back({compile(sub), sub.type, sub.weight});
    }
  }

  const Metric& metric_;
  std::deque<CompiledOption> nodes_;
  std::map<std::string, const CompiledOption*> bySubMetric_;
  const CompiledOption* root_ = nullptr;
};

std::optional<Language> languageOf(const ArtifactRef& r) {
  if (auto* p = std::get_if<const Pou*>(&r)) return (*p)->body.language();
  if (auto* a = std::get_if<const NamedAction*>(&r)) return (*a)->body.language();
  return std::nullopt;
}

void finishPair(ArtifactPairNode& node, bool weighted) {
  double num = 0.0, den = 0.0;
  for (const auto& o : node.options) {
    if (o.vacuous) continue;
    double w = weighted ? o.weight : 1.0;
    num += w * o.similarity;
    den += w;
  }
  for (const auto& a : node.attributes) {
    double w = weighted ? a.weight : 1.0;
    num += w * a.similarity;
    den += w;
  }
  for (auto& o : node.options) {
    o.effectiveWeight = (o.vacuous || den <= 0.0) ? 0.0 : (weighted ? o.weight : 1.0) / den;
  }
  for (auto& a : node.attributes) {
    a.effectiveWeight = den <= 0.0 ? 0.0 : (weighted ? a.weight : 1.0) / den;
  }
  node.similarity = den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 1.0;
}

double optionSimilarity(const OptionNode& o) {
  if (o.vacuous) return 1.0;
  const std::size_t denom = std::max(o.leftItems.size(), o.rightItems.size());
  double sum = 0.0;
  // Summed in left-item order; pairs are stored sorted by leftIndex.
  for (const auto& p : o.pairs) {
    if (p.selected) sum += p.similarity;
  }
  return std::clamp(sum / static_cast<double>(denom), 0.0, 1.0);
}

std::vector<std::size_t> ranksOf(const std::vector<ChildEntry>& items) {
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return compareSegments(items[a].segment, items[b].segment) < 0;
  });
  std::vector<std::size_t> rank(items.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

class Engine {
 public:
  Engine(bool weighted, bool retainUnmatched) : weighted_(weighted), retain_(retainUnmatched) {}

  ArtifactPairNode comparePair(const ArtifactRef& x, const ArtifactRef& y,
                               const CompiledOption& option, bool skipPouName) {
    ArtifactPairNode node;
    node.type = typeOf(x);
    if (typeOf(y) != node.type || option.type != node.type) {
      throw MetricValidationError(
          MetricValidationError::Kind::TypeMismatch, std::string(toString(option.type)),
          "cannot compare " + std::string(toString(node.type)) + " with " +
              std::string(toString(typeOf(y))) + " under this option");
    }
    ++pairCounts_[static_cast<std::size_t>(node.type)];
    if (auto lx = languageOf(x)) {
      if (lx != languageOf(y)) ++crossLanguage_;
    }

    node.options.reserve(option.children.size());
    for (const auto& child : option.children) {
      OptionNode& on = node.options.emplace_back();
      on.type = child.type;
      on.weight = child.weight;
      on.leftItems = childEntries(x, child.type);
      on.rightItems = childEntries(y, child.type);
      const std::size_t n = on.leftItems.size(), m = on.rightItems.size();
      if (n == 0 && m == 0) {
        on.vacuous = true;
        on.similarity = 1.0;
        continue;
      }
      if (n > 0 && m > 0) matchOption(on, *child.target);
      on.similarity = optionSimilarity(on);
    }

    for (const auto& [index, weight] : option.attributes) {
      if (skipPouName && attributeCatalog()[index].id == "pou-name") continue;
      AttributeNode a;
      a.attribute = index;
      a.weight = weight;
      a.similarity = evalAttribute(index, x, y);
      ++attributeEvaluations_;
      node.attributes.push_back(a);
    }
    finishPair(node, weighted_);
    return node;
  }

  PairCounts counts() const {
    PairCounts c;
    for (std::size_t i = 0; i < kTypeCount; ++i) {
      if (pairCounts_[i]) c.pairs[static_cast<ArtifactType>(i)] = pairCounts_[i];
    }
    c.attributeEvaluations = attributeEvaluations_;
    c.crossLanguage = crossLanguage_;
    return c;
  }

 private:
  void matchOption(OptionNode& on, const CompiledOption& target) {
    const std::size_t n = on.leftItems.size(), m = on.rightItems.size();
    std::vector<ArtifactPairNode> all;
    all.reserve(n * m);
    std::vector<IndexedEdge> edges;
    edges.reserve(n * m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        ArtifactPairNode p = comparePair(on.leftItems[i].ref, on.rightItems[j].ref, target, false);
        p.leftIndex = i;
        p.rightIndex = j;
        p.selected = false;
        edges.push_back({i, j, p.similarity});
        all.push_back(std::move(p));
      }
    }
    auto chosen = greedySelect(std::move(edges), ranksOf(on.leftItems), ranksOf(on.rightItems));
    for (const auto& e : chosen) all[e.left * m + e.right].selected = true;
    if (retain_) {
      on.pairs = std::move(all);
      return;
    }
    on.pairs.reserve(chosen.size());
    for (auto& p : all) {
      if (p.selected) on.pairs.push_back(std::move(p));
    }
  }

  bool weighted_;
  bool retain_;
  std::array<std::size_t, kTypeCount> pairCounts_{};
  std::size_t attributeEvaluations_ = 0;
  std::size_t crossLanguage_ = 0;
};

const MetricOption& pouScope(const Metric& metric) {
  if (metric.root.type == ArtifactType::Pou) return metric.root;
  if (metric.root.type == ArtifactType::Project) {
    for (const auto& o : metric.root.options) {
      if (o.type == ArtifactType::Pou) return o;
    }
  }
  throw MetricValidationError(MetricValidationError::Kind::TypeMismatch, "root",
                              "metric has no POU-level option");
}

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

}  // namespace

SimilarityTree compare(const ArtifactRef& x, const ArtifactRef& y, const MetricOption& option,
                       const Metric& metric, const CompareOptions& options) {
  CompiledMetric compiled(metric, option);
  Engine engine(metric.weighted, options.retainUnmatched);
  SimilarityTree tree;
  tree.leftRoot = x;
  tree.rightRoot = y;
  tree.weighted = metric.weighted;
  tree.root = engine.comparePair(x, y, compiled.root(),
                                 options.ignoreRootPouName && typeOf(x) == ArtifactType::Pou);
  tree.counts = engine.counts();
  return tree;
}

void propagate(ArtifactPairNode& root, bool weighted) {
  for (auto& o : root.options) {
    for (auto& p : o.pairs) propagate(p, weighted);
    o.similarity = optionSimilarity(o);
  }
  finishPair(root, weighted);
}

SimilarityTree compareInter(const Project& a, const Project& b, const Metric& metric,
                            const CompareOptions& options) {
  validateMetric(metric);
  if (metric.root.type == ArtifactType::Project) {
    return compare(&a, &b, metric.root, metric, options);
  }
  if (metric.root.type == ArtifactType::Pou) {
    MetricOption lifted;
    lifted.type = ArtifactType::Project;
    lifted.options.push_back(metric.root);
    return compare(&a, &b, lifted, metric, options);
  }
  throw MetricValidationError(MetricValidationError::Kind::TypeMismatch, "root",
                              "inter-variant comparison needs a project or POU rooted metric");
}

std::vector<SimilarityTree> compareIntra(const Project& p, const Metric& metric,
                                         const CompareOptions& options, unsigned jobs) {
  validateMetric(metric);
  const MetricOption& pouOption = pouScope(metric);
  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t i = 0; i < p.pous.size(); ++i) {
    for (std::size_t j = i + 1; j < p.pous.size(); ++j) work.emplace_back(i, j);
  }
  std::vector<SimilarityTree> out(work.size());
  CompareOptions intra = options;
  intra.ignoreRootPouName = true;
  auto run = [&](std::size_t k) {
    const auto [i, j] = work[k];
    out[k] = compare(&p.pous[i], &p.pous[j], pouOption, metric, intra);
    out[k].leftPath = ArtifactPath().child("pous", p.pous[i].name);
    out[k].rightPath = ArtifactPath().child("pous", p.pous[j].name);
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, work.size()))));
  if (jobs == 1) {
    for (std::size_t k = 0; k < work.size(); ++k) run(k);
    return out;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(jobs);
  for (unsigned t = 0; t < jobs; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (std::size_t k = t; k < work.size(); k += jobs) run(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

const PairCounts& countPairs(const SimilarityTree& tree) { return tree.counts; }

PairCounts countRetainedPairs(const ArtifactPairNode& root) {
  PairCounts c;
  std::function<void(const ArtifactPairNode&)> visit = [&](const ArtifactPairNode& n) {
    ++c.pairs[n.type];
    c.attributeEvaluations += n.attributes.size();
    for (const auto& o : n.options) {
      for (const auto& p : o.pairs) visit(p);
    }
  };
  visit(root);
  return c;
}

namespace {

void walkPair(const ArtifactPairNode& node, const ArtifactRef& left, const ArtifactRef& right,
              const ArtifactPath& leftPath, const ArtifactPath& rightPath, std::size_t depth,
              const std::function<void(const PairVisit&)>& onPair,
              const std::function<void(const UnmatchedVisit&)>& onUnmatched) {
  if (onPair) onPair(PairVisit{node, left, right, leftPath, rightPath, depth});
  for (const auto& o : node.options) {
    for (const auto& p : o.pairs) {
      if (!p.selected) continue;
      const ChildEntry& l = o.leftItems[p.leftIndex];
      const ChildEntry& r = o.rightItems[p.rightIndex];
      walkPair(p, l.ref, r.ref, leftPath.child(l.segment), rightPath.child(r.segment), depth + 1,
               onPair, onUnmatched);
    }
    if (!onUnmatched) continue;
    for (std::size_t i : o.unmatchedLeft()) {
      onUnmatched(UnmatchedVisit{o, o.leftItems[i], leftPath.child(o.leftItems[i].segment), true});
    }
    for (std::size_t j : o.unmatchedRight()) {
      onUnmatched(
          UnmatchedVisit{o, o.rightItems[j], rightPath.child(o.rightItems[j].segment), false});
    }
  }
}

nlohmann::ordered_json pairJson(const ArtifactPairNode& node, const ArtifactPath& leftPath,
                                const ArtifactPath& rightPath) {
  nlohmann::ordered_json j;
  j["type"] = std::string(toString(node.type));
  j["left"] = leftPath.toString();
  j["right"] = rightPath.toString();
  j["similarity"] = round4(node.similarity);
  j["attributes"] = nlohmann::ordered_json::array();
  for (const auto& a : node.attributes) {
    j["attributes"].push_back({{"id", std::string(a.id())},
                               {"similarity", round4(a.similarity)},
                               {"weight", round4(a.effectiveWeight)}});
  }
  j["options"] = nlohmann::ordered_json::array();
  for (const auto& o : node.options) {
    nlohmann::ordered_json oj;
    oj["type"] = std::string(toString(o.type));
    oj["similarity"] = round4(o.similarity);
    oj["weight"] = round4(o.effectiveWeight);
    oj["vacuous"] = o.vacuous;
    oj["pairs"] = nlohmann::ordered_json::array();
    for (const auto& p : o.pairs) {
      if (!p.selected) continue;
      oj["pairs"].push_back(pairJson(p, leftPath.child(o.leftItems[p.leftIndex].segment),
                                     rightPath.child(o.rightItems[p.rightIndex].segment)));
    }
    oj["unmatchedLeft"] = nlohmann::ordered_json::array();
    for (std::size_t i : o.unmatchedLeft()) {
      oj["unmatchedLeft"].push_back(leftPath.child(o.leftItems[i].segment).toString());
    }
    oj["unmatchedRight"] = nlohmann::ordered_json::array();
    for (std::size_t i : o.unmatchedRight()) {
      oj["unmatchedRight"].push_back(rightPath.child(o.rightItems[i].segment).toString());
    }
    j["options"].push_back(std::move(oj));
  }
  return j;
}

}  // namespace

void walkTree(const SimilarityTree& tree, const std::function<void(const PairVisit&)>& onPair,
              const std::function<void(const UnmatchedVisit&)>& onUnmatched) {
  walkPair(tree.root, tree.leftRoot, tree.rightRoot, tree.leftPath, tree.rightPath, 0, onPair,
           onUnmatched);
}

std::string similarityTreeJson(const SimilarityTree& tree) {
  nlohmann::ordered_json j;
  j["similarity"] = round4(tree.root.similarity);
  j["root"] = pairJson(tree.root, tree.leftPath, tree.rightPath);
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [type, n] : tree.counts.pairs) counts[std::string(toString(type))] = n;
  j["pairCounts"] = counts;
  j["attributeEvaluations"] = tree.counts.attributeEvaluations;
  return j.dump(2) + "\n";
}

}  // namespace iecclone
