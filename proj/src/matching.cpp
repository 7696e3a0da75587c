#include "iecclone/matching.hpp"

#include <algorithm>
#include <map>

namespace iecclone {

std::vector<IndexedEdge> greedySelect(std::vector<IndexedEdge> edges,
                                      const std::vector<std::size_t>& leftRank,
                                      const std::vector<std::size_t>& rightRank) {
  std::sort(edges.begin(), edges.end(), [&](const IndexedEdge& a, const IndexedEdge& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (leftRank[a.left] != leftRank[b.left]) return leftRank[a.left] < leftRank[b.left];
    return rightRank[a.right] < rightRank[b.right];
  });
  std::vector<bool> leftUsed(leftRank.size()), rightUsed(rightRank.size());
  std::vector<IndexedEdge> out;
  for (const auto& e : edges) {
    if (!(e.similarity > 0.0)) break;
    if (leftUsed[e.left] || rightUsed[e.right]) continue;
    leftUsed[e.left] = rightUsed[e.right] = true;
    out.push_back(e);
  }
  return out;
}

MatchResult greedyMatch(const std::vector<MatchEdge>& edges) {
  std::map<ArtifactPath, std::size_t> leftIds, rightIds;
  for (const auto& e : edges) {
    leftIds.emplace(e.left, 0);
    rightIds.emplace(e.right, 0);
  }
  std::vector<ArtifactPath> lefts, rights;
  for (auto& [path, id] : leftIds) {
    id = lefts.size();
    lefts.push_back(path);
  }
  for (auto& [path, id] : rightIds) {
    id = rights.size();
    rights.push_back(path);
  }
  // Ids are assigned in path order, so the id doubles as the rank.
  std::vector<std::size_t> leftRank(lefts.size()), rightRank(rights.size());
  for (std::size_t i = 0; i < lefts.size(); ++i) leftRank[i] = i;
  for (std::size_t i = 0; i < rights.size(); ++i) rightRank[i] = i;

  std::vector<IndexedEdge> indexed;
  indexed.reserve(edges.size());
  for (const auto& e : edges) indexed.push_back({leftIds[e.left], rightIds[e.right], e.similarity});

  MatchResult result;
  std::vector<bool> leftUsed(lefts.size()), rightUsed(rights.size());
  for (const auto& e : greedySelect(std::move(indexed), leftRank, rightRank)) {
    leftUsed[e.left] = rightUsed[e.right] = true;
    result.selected.push_back({lefts[e.left], rights[e.right], e.similarity});
  }
  for (std::size_t i = 0; i < lefts.size(); ++i) {
    if (!leftUsed[i]) result.unmatchedLeft.push_back(lefts[i]);
  }
  for (std::size_t i = 0; i < rights.size(); ++i) {
    if (!rightUsed[i]) result.unmatchedRight.push_back(rights[i]);
  }
  return result;
}

}  // namespace iecclone
