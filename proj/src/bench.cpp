#include "iecclone/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace iecclone {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

BenchResult runBench(const std::vector<std::string>& labels, const std::vector<Project>& left,
                     const std::vector<Project>& right, const Metric& metric,
                     std::size_t repeat) {
  if (left.size() != right.size() || labels.size() != left.size()) {
    throw std::invalid_argument("runBench: inputs differ in length");
  }
  BenchResult result;
  result.rows.resize(left.size());
  for (std::size_t i = 0; i < left.size(); ++i) {
    result.rows[i].label = labels[i];
    result.rows[i].seconds = std::numeric_limits<double>::infinity();
  }
  // Rounds sweep all inputs so that a burst of machine load does not hit
  // every repetition of the same input.
  for (std::size_t r = 0; r < std::max<std::size_t>(repeat, 1); ++r) {
    for (std::size_t i = 0; i < left.size(); ++i) {
      BenchRow& row = result.rows[i];
      const auto start = std::chrono::steady_clock::now();
      SimilarityTree tree = compareInter(left[i], right[i], metric);
      const double s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      row.seconds = std::min(row.seconds, s);
      row.counts = countPairs(tree);
    }
  }
  std::vector<double> pairs, seconds;
  for (auto& row : result.rows) {
    row.pairs = row.counts.totalPairs();
    pairs.push_back(static_cast<double>(row.pairs));
    seconds.push_back(row.seconds);
  }
  result.correlation = pearson(pairs, seconds);
  return result;
}

BenchResult runGeneratedBench(const std::vector<std::size_t>& pouCounts,
                              const GeneratorOptions& base, const Metric& metric,
                              std::size_t repeat) {
  std::vector<std::string> labels;
  std::vector<Project> left, right;
  for (std::size_t n : pouCounts) {
    GeneratorOptions o = base;
    o.pous = n;
    left.push_back(generateProject(o));
    o.seed = base.seed + 1;
    right.push_back(generateProject(o));
    labels.push_back("generated-" + std::to_string(n));
  }
  return runBench(labels, left, right, metric, repeat);
}

namespace {

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string benchReportText(const BenchResult& result, bool includeTiming) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-24s %12s %14s%s\n", "input", "pairs", "attr-evals",
                includeTiming ? "    elapsed-s" : "");
  out += buf;
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof buf, "%-24s %12zu %14zu", r.label.c_str(), r.pairs,
                  r.counts.attributeEvaluations);
    out += buf;
    if (includeTiming) out += "   " + fixed(r.seconds, 4);
    out += "\n";
  }
  if (includeTiming) out += "correlation(pairs, time) " + fixed(result.correlation, 4) + "\n";
  if (!result.rows.empty()) {
    const BenchRow& last = result.rows.back();
    out += "pairs by type (" + last.label + ")\n";
    for (const auto& [type, n] : last.counts.pairs) {
      std::snprintf(buf, sizeof buf, "  %-12s %12zu\n", std::string(toString(type)).c_str(), n);
      out += buf;
    }
  }
  return out;
}

std::string benchReportJson(const BenchResult& result, bool includeTiming) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : result.rows) {
    nlohmann::ordered_json row;
    row["input"] = r.label;
    row["pairs"] = r.pairs;
    row["attributeEvaluations"] = r.counts.attributeEvaluations;
    row["crossLanguage"] = r.counts.crossLanguage;
    nlohmann::ordered_json byType = nlohmann::ordered_json::object();
    for (const auto& [type, n] : r.counts.pairs) byType[std::string(toString(type))] = n;
    row["pairsByType"] = byType;
    if (includeTiming) row["seconds"] = std::round(r.seconds * 10000.0) / 10000.0;
    j["rows"].push_back(row);
  }
  if (includeTiming) j["correlation"] = std::round(result.correlation * 10000.0) / 10000.0;
  return j.dump(2) + "\n";
}

}  // namespace iecclone
