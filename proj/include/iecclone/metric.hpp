#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "iecclone/model.hpp"

namespace iecclone {

class MetricValidationError : public std::runtime_error {
 public:
  enum class Kind {
    Syntax,
    UnknownType,
    UnknownAttribute,
    WeightOutOfRange,
    TypeMismatch,
    DanglingReference,
    ZeroWeightSum,
  };

  MetricValidationError(Kind kind, std::string node, const std::string& message);

  Kind kind() const { return kind_; }
  /// Locator of the offending node, e.g. "root/options[0]/attributes[1]".
  const std::string& node() const { return node_; }

 private:
  Kind kind_;
  std::string node_;
};

struct MetricAttribute {
  std::string id;
  double weight = 1.0;

  bool operator==(const MetricAttribute&) const = default;
};

struct MetricOption {
  ArtifactType type = ArtifactType::Pou;
  double weight = 1.0;
  std::string label;  // optional display name
  std::vector<MetricOption> options;
  std::vector<MetricAttribute> attributes;
  // Name of a sub-metric whose options/attributes replace this option's own.
  std::optional<std::string> nestedRef;

  bool operator==(const MetricOption&) const = default;
};

struct Metric {
  std::string name;
  // false: all siblings count equally regardless of their weights.
  bool weighted = true;
  MetricOption root;
  std::map<std::string, MetricOption> subMetrics;

  /// The option whose children drive comparison: the referenced sub-metric
  /// for pointer options, the option itself otherwise.
  const MetricOption& resolve(const MetricOption& option) const;

  bool operator==(const Metric&) const = default;
};

enum class BuiltinMetric { Coarse, Fine };

Metric builtinMetric(BuiltinMetric kind);
std::optional<BuiltinMetric> builtinMetricFromString(std::string_view name);

/// Throws MetricValidationError naming the first offending node.
void validateMetric(const Metric& metric);

Metric loadMetric(std::string_view document);
Metric loadMetricFile(const std::string& path);
std::string saveMetric(const Metric& metric);

// ---------------------------------------------------------------------------
// Attribute catalog
// ---------------------------------------------------------------------------

struct AttributeInfo {
  std::string_view id;
  ArtifactType type;
  // Identifier-only attributes; differences here alone make a rename clone.
  bool nameAttribute;
  std::string_view description;
};

const std::vector<AttributeInfo>& attributeCatalog();

/// Catalog index of an attribute id, or nullopt.
std::optional<std::size_t> attributeIndex(std::string_view id);

/// Similarity in [0,1] of x and y under the attribute. Throws
/// MetricValidationError when the artifacts do not have the attribute's type.
double evalAttribute(std::string_view id, const ArtifactRef& x, const ArtifactRef& y);
double evalAttribute(std::size_t index, const ArtifactRef& x, const ArtifactRef& y);

/// min/max of two counts; 1 when both are zero.
double ratioSimilarity(std::size_t a, std::size_t b);

/// |A ∩ B| / max(|A|, |B|) over multisets; 1 when both are empty.
double multisetOverlap(std::vector<std::string> a, std::vector<std::string> b);

/// Top-down tree edit distance (relabel 1, insert/delete of a subtree costs
/// its size). With structuralOnly, identifier names and literal values are
/// ignored and only node kinds, operators and literal types are compared.
std::size_t expressionEditDistance(const Expression& a, const Expression& b,
                                   bool structuralOnly);

/// max(0, 1 - distance / max(size(a), size(b))).
double expressionSimilarity(const Expression& a, const Expression& b, bool structuralOnly);

}  // namespace iecclone
