#pragma once

// Timing of project comparisons against the number of pairs they create.

#include <cstddef>
#include <string>
#include <vector>

#include "iecclone/compare.hpp"
#include "iecclone/generator.hpp"
#include "iecclone/metric.hpp"

namespace iecclone {

struct BenchRow {
  std::string label;
  std::size_t pairs = 0;
  PairCounts counts;
  double seconds = 0.0;  // fastest of the repetitions
};

struct BenchResult {
  std::vector<BenchRow> rows;
  // Pearson correlation of pairs and seconds; 0 with fewer than two rows
  // or no variance.
  double correlation = 0.0;
};

/// Compares left[i] with right[i] for every i, `repeat` times each.
BenchResult runBench(const std::vector<std::string>& labels, const std::vector<Project>& left,
                     const std::vector<Project>& right, const Metric& metric,
                     std::size_t repeat = 3);

/// Generated project pairs: for each POU count, a project and an unrelated
/// one of the same shape (seed + 1).
BenchResult runGeneratedBench(const std::vector<std::size_t>& pouCounts,
                              const GeneratorOptions& base, const Metric& metric,
                              std::size_t repeat = 3);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

std::string benchReportText(const BenchResult& result, bool includeTiming = true);
std::string benchReportJson(const BenchResult& result, bool includeTiming = true);

}  // namespace iecclone
