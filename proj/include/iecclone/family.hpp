#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "iecclone/compare.hpp"

namespace iecclone {

class FamilyModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Category { Mandatory, Alternative, Optional };
enum class Origin { Both, LeftOnly, RightOnly };

std::string_view toString(Category category);
std::string_view toString(Origin origin);

struct FmNode {
  std::string name;
  std::string type;
  Category category = Category::Mandatory;
  Origin origin = Origin::Both;
  double similarity = 0.0;
  std::optional<std::string> leftPath;
  std::optional<std::string> rightPath;
  std::vector<FmNode> children;

  bool operator==(const FmNode&) const = default;
};

struct FamilyModel {
  double lambda = 1.0;
  FmNode root;

  bool operator==(const FamilyModel&) const = default;
};

inline constexpr double kDefaultLambda = 1.0;
inline constexpr double kDefaultCloneThreshold = 0.70;

/// Matched pairs become mandatory (s >= lambda) or alternative nodes,
/// unmatched items optional leaves. Throws FamilyModelError unless
/// 0 < lambda <= 1.
FamilyModel buildFamilyModel(const SimilarityTree& tree, double lambda = kDefaultLambda);

enum class ReportFormat { Json, Text, Dot };

std::optional<ReportFormat> reportFormatFromString(std::string_view name);

/// Json: nested document with every node field. Text: indented tree with
/// "!" mandatory, "?" optional and "<->" alternative markers. Dot: Graphviz.
std::string emitReport(const FamilyModel& model, ReportFormat format);

/// Inverse of the Json report. Similarities are as printed (4 decimals).
FamilyModel parseFamilyModelJson(std::string_view document);

/// Checks the category/origin/similarity invariants; one message per
/// violation.
std::vector<std::string> checkFamilyModel(const FamilyModel& model);

enum class CloneLabel { Identical, RenamedOnly, Structural };

std::string_view toString(CloneLabel label);

struct CloneCandidate {
  ArtifactPath leftPou;
  ArtifactPath rightPou;
  double similarity = 0.0;
  CloneLabel label = CloneLabel::Structural;
};

/// POU pairs with similarity >= threshold. Accepts intra results (one tree
/// per POU pair) or inter results (matched POU pairs of project trees).
std::vector<CloneCandidate> classifyClones(const std::vector<SimilarityTree>& results,
                                           double threshold = kDefaultCloneThreshold);

}  // namespace iecclone
