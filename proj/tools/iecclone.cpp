// iecclone: clone detection and variability analysis for PLCopen XML
// projects.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "iecclone/bench.hpp"
#include "iecclone/compare.hpp"
#include "iecclone/family.hpp"
#include "iecclone/generator.hpp"
#include "iecclone/metric.hpp"
#include "iecclone/mutation.hpp"
#include "iecclone/plcopen.hpp"

using namespace iecclone;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitMetric = 3;
constexpr int kExitInternal = 4;

// Bad input that is not a parse error (missing files, malformed contexts,
// inconsistent options).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void writeFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw InputError("write to '" + path + "' failed");
}

Project load(const std::string& path, bool quiet) {
  ParsedProject parsed = loadProject(path);
  if (!quiet) {
    for (const auto& w : parsed.report.warnings) {
      std::cerr << path << ": warning: " << (w.locator.empty() ? "" : w.locator + ": ")
                << w.message << "\n";
    }
  }
  return std::move(parsed.project);
}

Metric resolveMetric(const std::string& spec) {
  if (auto builtin = builtinMetricFromString(spec)) return builtinMetric(*builtin);
  return loadMetricFile(spec);
}

ReportFormat resolveFormat(const std::string& name) {
  auto f = reportFormatFromString(name);
  if (!f) throw InputError("unknown format '" + name + "'");
  return *f;
}

struct Common {
  std::string metric = "fine";
  double lambda = kDefaultLambda;
  std::string format = "text";
  std::string output;
  unsigned jobs = 1;
  bool quiet = false;
};

void addMetricOptions(CLI::App* cmd, Common& c) {
  cmd->add_option("--metric", c.metric, "coarse, fine, or a metric JSON file")
      ->capture_default_str();
  cmd->add_option("--lambda", c.lambda, "similarity at or above which a pair is mandatory")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

// Everything a command prints goes through here so that failures leave no
// partial output behind.
struct Output {
  std::string stdoutText;
  std::vector<std::pair<std::string, std::string>> files;

  void flush() const {
    for (const auto& [path, content] : files) writeFile(path, content);
    std::cout << stdoutText;
    std::cout.flush();
  }
};

Output cmdCompare(const std::string& a, const std::string& b, const Common& c, bool tree) {
  if (!(c.lambda > 0.0)) throw InputError("--lambda must lie in (0, 1]");
  Metric metric = resolveMetric(c.metric);
  Project left = load(a, c.quiet);
  Project right = load(b, c.quiet);
  SimilarityTree t = compareInter(left, right, metric);
  FamilyModel fm = buildFamilyModel(t, c.lambda);
  const ReportFormat format = resolveFormat(c.format);
  std::string report = emitReport(fm, format);
  if (format == ReportFormat::Json) {
    auto j = nlohmann::ordered_json::parse(report);
    nlohmann::ordered_json doc;
    doc["similarity"] = std::round(t.similarity() * 10000.0) / 10000.0;
    doc["metric"] = metric.name;
    for (auto it = j.begin(); it != j.end(); ++it) doc[it.key()] = it.value();
    report = doc.dump(2) + "\n";
  }
  Output out;
  const std::string summary = "overall similarity: " + fixed4(t.similarity()) + "\n";
  if (format == ReportFormat::Json && c.output.empty()) {
    out.stdoutText = report;
  } else if (c.output.empty()) {
    out.stdoutText = summary + report;
  } else {
    out.stdoutText = summary;
    out.files.emplace_back(c.output, report);
  }
  if (tree) out.files.emplace_back(c.output.empty() ? "similarity-tree.json" : c.output + ".tree.json",
                                   similarityTreeJson(t));
  return out;
}

Output cmdIntra(const std::string& path, const Common& c, double threshold, bool family) {
  if (!(c.lambda > 0.0)) throw InputError("--lambda must lie in (0, 1]");
  Metric metric = resolveMetric(c.metric);
  Project p = load(path, c.quiet);
  CompareOptions options;
  options.ignoreRootPouName = true;
  std::vector<SimilarityTree> trees = compareIntra(p, metric, options, c.jobs);
  std::vector<CloneCandidate> candidates = classifyClones(trees, threshold);
  const ReportFormat format = resolveFormat(c.format);

  auto familyOf = [&](const CloneCandidate& cand) -> const SimilarityTree& {
    for (const auto& t : trees) {
      if (t.leftPath == cand.leftPou && t.rightPath == cand.rightPou) return t;
    }
    throw std::logic_error("candidate without tree");
  };

  Output out;
  if (format == ReportFormat::Json) {
    nlohmann::ordered_json j;
    j["threshold"] = std::round(threshold * 10000.0) / 10000.0;
    j["pairsCompared"] = trees.size();
    j["candidates"] = nlohmann::ordered_json::array();
    for (const auto& cand : candidates) {
      nlohmann::ordered_json e;
      e["left"] = cand.leftPou.toString();
      e["right"] = cand.rightPou.toString();
      e["similarity"] = std::round(cand.similarity * 10000.0) / 10000.0;
      e["label"] = std::string(toString(cand.label));
      if (family) {
        e["familyModel"] = nlohmann::ordered_json::parse(
            emitReport(buildFamilyModel(familyOf(cand), c.lambda), ReportFormat::Json));
      }
      j["candidates"].push_back(e);
    }
    out.stdoutText = j.dump(2) + "\n";
  } else {
    std::string text = "clone candidates (threshold " + fixed4(threshold) + ", " +
                       std::to_string(trees.size()) + " pairs compared): " +
                       std::to_string(candidates.size()) + "\n";
    for (const auto& cand : candidates) {
      text += "  " + cand.leftPou.segments().back().key + " <-> " +
              cand.rightPou.segments().back().key + "  " + fixed4(cand.similarity) + "  " +
              std::string(toString(cand.label)) + "\n";
      if (family) text += emitReport(buildFamilyModel(familyOf(cand), c.lambda), format);
    }
    out.stdoutText = text;
  }
  if (!c.output.empty()) {
    out.files.emplace_back(c.output, out.stdoutText);
    out.stdoutText.clear();
  }
  return out;
}

MutationCategory parseCategory(const std::string& name) {
  auto cat = mutationCategoryFromString(name);
  if (!cat) throw InputError("unknown category '" + name + "' (expected t2 or t3)");
  return *cat;
}

Output cmdMutate(const std::string& seedPath, const std::string& category, std::size_t count,
                 std::uint64_t rngSeed, const std::string& output, std::string contextPath,
                 bool quiet) {
  Project seed = load(seedPath, quiet);
  Mutant m = mutate(seed, parseCategory(category), count, rngSeed);
  if (contextPath.empty()) contextPath = output + ".context.json";
  Output out;
  out.files.emplace_back(output, writeProject(m.project));
  out.files.emplace_back(contextPath, mutationContextJson(m.context));
  out.stdoutText = "wrote " + output + " (" + std::to_string(m.context.performed) + " of " +
                   std::to_string(m.context.requested) + " mutations, " +
                   std::to_string(m.context.records.size()) + " changed artifacts)\nwrote " +
                   contextPath + "\n";
  return out;
}

std::string outcomeText(const EvalOutcome& o) {
  std::string s = "precision " + fixed4(o.precision) + "  recall " + fixed4(o.recall) + "  (tp " +
                  std::to_string(o.tp) + ", fp " + std::to_string(o.fp) + ", fn " +
                  std::to_string(o.fn) + ")\n";
  for (const auto& k : o.falsePositives) s += "  false positive " + k + "\n";
  for (const auto& k : o.falseNegatives) s += "  false negative " + k + "\n";
  return s;
}

Output cmdScore(const std::string& seedPath, const std::string& mutantPath,
                const std::string& contextPath, const Common& c) {
  if (!(c.lambda > 0.0)) throw InputError("--lambda must lie in (0, 1]");
  Metric metric = resolveMetric(c.metric);
  Project seed = load(seedPath, c.quiet);
  Project mutant = load(mutantPath, c.quiet);
  MutationContext ctx = parseMutationContextJson(readFile(contextPath));
  EvalOutcome o = evaluateDetection(seed, mutant, ctx, metric, c.lambda);
  Output out;
  if (resolveFormat(c.format) == ReportFormat::Json) {
    nlohmann::ordered_json j;
    j["precision"] = std::round(o.precision * 10000.0) / 10000.0;
    j["recall"] = std::round(o.recall * 10000.0) / 10000.0;
    j["tp"] = o.tp;
    j["fp"] = o.fp;
    j["fn"] = o.fn;
    j["falsePositives"] = o.falsePositives;
    j["falseNegatives"] = o.falseNegatives;
    out.stdoutText = j.dump(2) + "\n";
  } else {
    out.stdoutText = outcomeText(o);
  }
  return out;
}

Output cmdEvaluate(const std::vector<std::string>& seedPaths, const Common& c,
                   const std::string& category, std::size_t iterations, std::uint64_t rngSeed,
                   std::size_t count, bool timing) {
  if (!(c.lambda > 0.0)) throw InputError("--lambda must lie in (0, 1]");
  Metric metric = resolveMetric(c.metric);
  std::vector<Project> seeds;
  for (const auto& p : seedPaths) seeds.push_back(load(p, c.quiet));
  std::vector<MutationCategory> categories;
  if (category == "both" || category == "all") {
    categories = {MutationCategory::T2, MutationCategory::T3};
  } else {
    categories = {parseCategory(category)};
  }
  const bool json = resolveFormat(c.format) == ReportFormat::Json;
  Output out;
  nlohmann::ordered_json reports = nlohmann::ordered_json::array();
  for (auto cat : categories) {
    CampaignReport r = runCampaign(seeds, iterations, cat, metric, c.lambda, rngSeed, c.jobs, count);
    if (json) {
      reports.push_back(nlohmann::ordered_json::parse(campaignReportJson(r, timing)));
    } else {
      if (!out.stdoutText.empty()) out.stdoutText += "\n";
      out.stdoutText += campaignReportText(r, timing);
    }
  }
  if (json) out.stdoutText = (reports.size() == 1 ? reports[0] : reports).dump(2) + "\n";
  if (!c.output.empty()) {
    out.files.emplace_back(c.output, out.stdoutText);
    out.stdoutText.clear();
  }
  return out;
}

std::vector<std::size_t> parseSizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t pos = 0;
      unsigned long v = std::stoul(item, &pos);
      if (pos != item.size() || v == 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InputError("--sizes expects positive integers separated by commas, got '" + item + "'");
    }
  }
  if (out.empty()) throw InputError("--sizes is empty");
  return out;
}

Output cmdBench(const std::vector<std::string>& files, const Common& c, const std::string& sizes,
                const GeneratorOptions& gen, std::size_t repeat, bool timing) {
  Metric metric = resolveMetric(c.metric);
  BenchResult r;
  if (!files.empty()) {
    std::vector<Project> projects;
    for (const auto& f : files) projects.push_back(load(f, c.quiet));
    r = runBench(files, projects, projects, metric, repeat);
  } else {
    r = runGeneratedBench(parseSizes(sizes), gen, metric, repeat);
  }
  Output out;
  out.stdoutText = resolveFormat(c.format) == ReportFormat::Json ? benchReportJson(r, timing)
                                                                 : benchReportText(r, timing);
  if (!c.output.empty()) {
    out.files.emplace_back(c.output, out.stdoutText);
    out.stdoutText.clear();
  }
  return out;
}

Output cmdGenerate(const GeneratorOptions& gen, const std::string& output) {
  Project p = generateProject(gen);
  Output out;
  if (output.empty() || output == "-") {
    out.stdoutText = writeProject(p);
  } else {
    out.files.emplace_back(output, writeProject(p));
  }
  return out;
}

Output cmdMetric(const std::string& action, const std::string& target) {
  Output out;
  if (action == "catalog") {
    for (const auto& a : attributeCatalog()) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%-34s %-11s %s\n", std::string(a.id).c_str(),
                    std::string(toString(a.type)).c_str(), std::string(a.description).c_str());
      out.stdoutText += buf;
    }
  } else if (action == "show") {
    out.stdoutText = saveMetric(resolveMetric(target.empty() ? "fine" : target));
  } else if (action == "validate") {
    if (target.empty()) throw InputError("metric validate needs a file");
    Metric m = loadMetricFile(target);
    out.stdoutText = "metric '" + m.name + "' is valid\n";
  } else {
    throw InputError("unknown metric action '" + action + "' (catalog, show, validate)");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clone detection and variability analysis for IEC 61131-3 PLCopen XML projects"};
  app.require_subcommand(1);
  Common common;
  auto addCommon = [&](CLI::App* cmd, bool withMetric) {
    if (withMetric) addMetricOptions(cmd, common);
    cmd->add_option("--format", common.format, "json, text or dot")->capture_default_str();
    cmd->add_option("-o,--output", common.output, "write the report to a file");
    cmd->add_flag("-q,--quiet", common.quiet, "suppress parser warnings");
  };

  std::string a, b;
  bool tree = false;
  auto* compare = app.add_subcommand("compare", "compare two projects and report the family model");
  compare->add_option("left", a, "first project")->required();
  compare->add_option("right", b, "second project")->required();
  compare->add_flag("--tree", tree, "also write the full similarity tree as JSON");
  compare->add_option("--jobs", common.jobs, "accepted for symmetry; comparison is sequential");
  addCommon(compare, true);

  double threshold = kDefaultCloneThreshold;
  bool family = false;
  auto* intra = app.add_subcommand("intra", "pairwise POU comparison within one project");
  intra->add_option("project", a, "project file")->required();
  intra->add_option("--threshold", threshold, "minimum similarity of a clone candidate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  intra->add_flag("--family", family, "include the family model of every candidate");
  intra->add_option("--jobs", common.jobs, "parallel POU pair comparisons")->check(CLI::PositiveNumber);
  addCommon(intra, true);

  std::string category = "t3";
  std::size_t count = 1;
  std::uint64_t rngSeed = 1;
  std::string output, contextPath;
  auto* mutateCmd = app.add_subcommand("mutate", "write a mutant of a seed project and its mutation context");
  mutateCmd->add_option("seed-project", a, "seed project")->required();
  mutateCmd->add_option("--category", category, "t2 or t3")->capture_default_str();
  mutateCmd->add_option("--count", count, "number of mutations")->capture_default_str();
  mutateCmd->add_option("--seed", rngSeed, "random seed")->capture_default_str();
  mutateCmd->add_option("-o,--output", output, "mutant project file")->required();
  mutateCmd->add_option("--context", contextPath, "context file (default: <output>.context.json)");
  mutateCmd->add_flag("-q,--quiet", common.quiet, "suppress parser warnings");

  std::string mutantPath;
  auto* score = app.add_subcommand("score", "score the detector on one mutant against its context");
  score->add_option("seed-project", a, "seed project")->required();
  score->add_option("mutant", mutantPath, "mutant project")->required();
  score->add_option("context", contextPath, "mutation context")->required();
  addCommon(score, true);

  std::vector<std::string> files;
  std::size_t iterations = 1000;
  bool noTiming = false;
  auto* evaluate = app.add_subcommand("evaluate", "mutation campaign: precision and recall over many mutants");
  evaluate->add_option("seeds", files, "seed projects")->required();
  evaluate->add_option("--category", category, "t2, t3 or both")->capture_default_str();
  evaluate->add_option("--iterations", iterations, "number of mutants")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evaluate->add_option("--seed", rngSeed, "campaign random seed")->capture_default_str();
  evaluate->add_option("--count", count, "mutations per mutant")->check(CLI::PositiveNumber)->capture_default_str();
  evaluate->add_option("--jobs", common.jobs, "parallel iterations")->check(CLI::PositiveNumber);
  evaluate->add_flag("--no-timing", noTiming, "omit wall-clock fields");
  addCommon(evaluate, true);

  std::string sizes = "4,8,12,16,20,24,28,32,36,40";
  std::size_t repeat = 3;
  GeneratorOptions gen;
  auto* bench = app.add_subcommand("bench", "time comparisons against the number of created pairs");
  bench->add_option("inputs", files, "projects to compare with themselves (default: generated)");
  bench->add_option("--sizes", sizes, "POU counts of the generated projects")->capture_default_str();
  bench->add_option("--repeat", repeat, "timing repetitions, fastest counts")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  bench->add_flag("--no-timing", noTiming, "omit wall-clock fields");
  bench->add_option("--metric", common.metric, "coarse, fine, or a metric JSON file")->capture_default_str();
  bench->add_option("--format", common.format, "json or text")->capture_default_str();
  bench->add_option("-o,--output", common.output, "write the report to a file");
  bench->add_flag("-q,--quiet", common.quiet, "suppress parser warnings");

  bool noMix = false;
  auto* generate = app.add_subcommand("generate", "emit a synthetic project for scaling measurements");
  generate->add_option("--pous", gen.pous, "number of POUs")->capture_default_str();
  generate->add_option("--variables", gen.variablesPerPou, "variables per POU")->capture_default_str();
  generate->add_option("--statements", gen.statementsPerPou, "top-level statements per ST body")->capture_default_str();
  generate->add_option("--nesting", gen.maxNesting, "maximum statement nesting")->capture_default_str();
  generate->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  generate->add_flag("--st-only", noMix, "ST bodies only");
  generate->add_option("-o,--output", output, "output file (default: stdout)");

  std::string metricAction, metricTarget;
  auto* metricCmd = app.add_subcommand("metric", "list attributes, print or validate metrics");
  metricCmd->add_option("action", metricAction, "catalog, show or validate")->required();
  metricCmd->add_option("target", metricTarget, "builtin name or metric file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    Output out;
    if (*compare) {
      out = cmdCompare(a, b, common, tree);
    } else if (*intra) {
      out = cmdIntra(a, common, threshold, family);
    } else if (*mutateCmd) {
      out = cmdMutate(a, category, count, rngSeed, output, contextPath, common.quiet);
    } else if (*score) {
      out = cmdScore(a, mutantPath, contextPath, common);
    } else if (*evaluate) {
      out = cmdEvaluate(files, common, category, iterations, rngSeed, count, !noTiming);
    } else if (*bench) {
      out = cmdBench(files, common, sizes, gen, repeat, !noTiming);
    } else if (*generate) {
      gen.mixLanguages = !noMix;
      out = cmdGenerate(gen, output);
    } else if (*metricCmd) {
      out = cmdMetric(metricAction, metricTarget);
    }
    out.flush();
    return kExitOk;
  } catch (const MetricValidationError& e) {
    std::cerr << "error: invalid metric: " << e.what() << "\n";
    return kExitMetric;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const MutationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const FamilyModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
