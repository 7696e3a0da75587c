#pragma once

#include <cstddef>
#include <vector>

#include "iecclone/model.hpp"

namespace iecclone {

struct IndexedEdge {
  std::size_t left = 0;
  std::size_t right = 0;
  double similarity = 0.0;

  bool operator==(const IndexedEdge&) const = default;
};

/// Greedy independent edge set. Edges are visited by descending similarity,
/// ties by (leftRank[left], rightRank[right]); an edge is taken when both
/// endpoints are free and its similarity is positive. Returns the taken
/// edges in visiting order.
std::vector<IndexedEdge> greedySelect(std::vector<IndexedEdge> edges,
                                      const std::vector<std::size_t>& leftRank,
                                      const std::vector<std::size_t>& rightRank);

struct MatchEdge {
  ArtifactPath left;
  ArtifactPath right;
  double similarity = 0.0;

  bool operator==(const MatchEdge&) const = default;
};

struct MatchResult {
  std::vector<MatchEdge> selected;
  std::vector<ArtifactPath> unmatchedLeft;
  std::vector<ArtifactPath> unmatchedRight;
};

/// Path-keyed form of greedySelect. Ties are broken by path order.
MatchResult greedyMatch(const std::vector<MatchEdge>& edges);

}  // namespace iecclone
