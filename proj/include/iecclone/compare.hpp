#pragma once

// Metric-driven pairwise comparison producing a similarity tree.
//
// Trees keep non-owning references (ChildEntry) into the compared projects;
// the projects must outlive the tree.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iecclone/metric.hpp"
#include "iecclone/model.hpp"

namespace iecclone {

struct AttributeNode {
  std::size_t attribute = 0;  // index into attributeCatalog()
  double similarity = 0.0;    // raw f(x, y)
  double weight = 0.0;        // declared weight
  double effectiveWeight = 0.0;

  std::string_view id() const;
};

struct ArtifactPairNode;

struct OptionNode {
  ArtifactType type = ArtifactType::Pou;
  double weight = 0.0;  // declared weight
  double effectiveWeight = 0.0;
  double similarity = 1.0;
  // Both sides have no children of this type; excluded from the parent's
  // weighted combination.
  bool vacuous = false;
  std::vector<ChildEntry> leftItems;
  std::vector<ChildEntry> rightItems;
  // Selected pairs, plus every other pair when retainUnmatched is set.
  std::vector<ArtifactPairNode> pairs;

  std::vector<std::size_t> unmatchedLeft() const;
  std::vector<std::size_t> unmatchedRight() const;
};

struct ArtifactPairNode {
  ArtifactType type = ArtifactType::Pou;
  std::size_t leftIndex = 0;  // into the parent OptionNode's items
  std::size_t rightIndex = 0;
  bool selected = true;
  double similarity = 0.0;
  std::vector<OptionNode> options;
  std::vector<AttributeNode> attributes;

  /// Weighted similarity of the pair's own attributes only (1 if none).
  double ownSimilarity(bool weighted = true) const;
};

struct PairCounts {
  std::map<ArtifactType, std::size_t> pairs;
  std::size_t attributeEvaluations = 0;
  // Pairs of POUs or actions whose bodies use different languages.
  std::size_t crossLanguage = 0;

  std::size_t totalPairs() const;
  PairCounts& operator+=(const PairCounts& other);
  bool operator==(const PairCounts&) const = default;
};

struct CompareOptions {
  // Keep the subtrees of pairs the matching did not select.
  bool retainUnmatched = false;
  // Skip the pou-name attribute on the root pair (intra-variant mode).
  bool ignoreRootPouName = false;
};

struct SimilarityTree {
  ArtifactRef leftRoot;
  ArtifactRef rightRoot;
  ArtifactPath leftPath;
  ArtifactPath rightPath;
  ArtifactPairNode root;
  PairCounts counts;
  bool weighted = true;

  double similarity() const { return root.similarity; }
};

/// Compares x and y under `option` (which must have their type).
SimilarityTree compare(const ArtifactRef& x, const ArtifactRef& y, const MetricOption& option,
                       const Metric& metric, const CompareOptions& options = {});

/// Recomputes option and pair similarities bottom-up from the selected
/// pairs: option = sum of selected similarities / max(|X|, |Y|), pair =
/// weighted mean of its non-vacuous options and attributes.
void propagate(ArtifactPairNode& root, bool weighted = true);

/// Project-level comparison. A metric rooted at POU scope is lifted to
/// project scope by comparing all POU pairs under it.
SimilarityTree compareInter(const Project& a, const Project& b, const Metric& metric,
                            const CompareOptions& options = {});

/// One tree per unordered POU pair (i < j), in (i, j) order.
std::vector<SimilarityTree> compareIntra(const Project& p, const Metric& metric,
                                         const CompareOptions& options = {},
                                         unsigned jobs = 1);

/// Pair and attribute-evaluation counts recorded during comparison.
const PairCounts& countPairs(const SimilarityTree& tree);

/// Counts over the pairs still present in the tree.
PairCounts countRetainedPairs(const ArtifactPairNode& root);

struct PairVisit {
  const ArtifactPairNode& node;
  ArtifactRef left;
  ArtifactRef right;
  ArtifactPath leftPath;
  ArtifactPath rightPath;
  std::size_t depth;
};

struct UnmatchedVisit {
  const OptionNode& option;
  const ChildEntry& item;
  ArtifactPath path;
  bool leftSide;
};

/// Depth-first walk over selected pairs and unmatched items.
void walkTree(const SimilarityTree& tree, const std::function<void(const PairVisit&)>& onPair,
              const std::function<void(const UnmatchedVisit&)>& onUnmatched = {});

/// Machine-readable dump of the tree (selected pairs and unmatched items).
std::string similarityTreeJson(const SimilarityTree& tree);

}  // namespace iecclone
