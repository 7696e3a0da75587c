#pragma once

// Mutant generation with recorded ground truth, and precision/recall scoring
// of the comparison against it.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "iecclone/metric.hpp"
#include "iecclone/model.hpp"

namespace iecclone {

class MutationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MutationCategory { T2, T3 };

std::string_view toString(MutationCategory category);
std::optional<MutationCategory> mutationCategoryFromString(std::string_view name);

enum class MutationOperator {
  // T2
  RenameVariable,
  RenamePou,
  RenameStepOrAction,
  ChangeLiteralValue,
  ChangeBinaryOperator,
  // T3
  AddStatement,
  RemoveStatement,
  AddVariable,
  RemoveVariable,
  AddSfcStep,
  RemoveSfcStep,
};

std::string_view toString(MutationOperator op);
std::optional<MutationOperator> mutationOperatorFromString(std::string_view name);
MutationCategory categoryOf(MutationOperator op);
const std::vector<MutationOperator>& operatorsOf(MutationCategory category);

struct MutationRecord {
  std::optional<ArtifactPath> originPath;  // absent for insertions
  std::optional<ArtifactPath> mutantPath;  // absent for deletions
  MutationOperator operatorId = MutationOperator::RenameVariable;

  bool operator==(const MutationRecord&) const = default;
};

struct MutationContext {
  std::string seedName;
  std::uint64_t rngSeed = 0;
  MutationCategory category = MutationCategory::T2;
  // Number of mutations asked for; records may cover fewer when the seed
  // ran out of sites.
  std::size_t requested = 0;
  std::size_t performed = 0;
  std::vector<MutationRecord> records;

  bool operator==(const MutationContext&) const = default;
};

std::string mutationContextJson(const MutationContext& context);
MutationContext parseMutationContextJson(std::string_view document);

struct Mutant {
  Project project;
  MutationContext context;
};

/// Applies `count` randomly drawn mutations of the category. Each draw picks
/// an operator uniformly among those with at least one site, then a site
/// uniformly. Deterministic in (seed, category, count, rngSeed).
Mutant mutate(const Project& seed, MutationCategory category, std::size_t count,
              std::uint64_t rngSeed);

/// Number of candidate sites per operator in the project.
std::map<MutationOperator, std::size_t> mutationSites(const Project& project);

// Targeted operators; each returns the records of the change it made.

/// Renames the declaration at `declaration` (pous/P/variables/V or
/// globals/V) and every reference in its scope.
std::vector<MutationRecord> renameVariable(Project& project, const ArtifactPath& declaration,
                                           const std::string& newName);

/// Smallest "<prefix><k>" (k >= 1) not used as an identifier anywhere in the
/// project, e.g. VAR1.
std::string freshName(const Project& project, std::string_view prefix);

struct EvalOutcome {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 1.0;
  double recall = 1.0;
  // Keys ("seed:<path>" or "mutant:<path>") for diagnostics.
  std::vector<std::string> falsePositives;
  std::vector<std::string> falseNegatives;

  /// Recomputes precision and recall from the counts.
  void finish();
};

/// Compares seed with mutant and scores the flagged artifacts against the
/// context. A matched pair is flagged when the similarity of its own
/// attributes is below lambda; unmatched artifacts are always flagged.
/// Artifacts are keyed by their seed path, insertions by their mutant path.
EvalOutcome evaluateDetection(const Project& seed, const Project& mutant,
                              const MutationContext& context, const Metric& metric,
                              double lambda = 1.0);

struct OperatorStats {
  std::size_t mutations = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double recall() const;
  double precision() const;
};

struct CampaignReport {
  std::size_t iterations = 0;
  MutationCategory category = MutationCategory::T2;
  std::string metricName;
  double lambda = 1.0;
  std::uint64_t rngSeed = 0;
  EvalOutcome aggregate;
  std::map<MutationOperator, OperatorStats> perOperator;
  double elapsedSeconds = 0.0;
};

/// Iteration i mutates seed i mod |seeds| with a seed derived from
/// (rngSeed, i). Counts are summed before the rates are computed, so the
/// result does not depend on `jobs`.
CampaignReport runCampaign(const std::vector<Project>& seeds, std::size_t iterations,
                           MutationCategory category, const Metric& metric, double lambda,
                           std::uint64_t rngSeed, unsigned jobs = 1, std::size_t count = 1);

/// Machine-readable report. The elapsed time is left out when
/// includeTiming is false so that runs can be compared byte for byte.
std::string campaignReportJson(const CampaignReport& report, bool includeTiming = true);
std::string campaignReportText(const CampaignReport& report, bool includeTiming = true);

/// splitmix64 step, used to derive per-iteration seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace iecclone
