// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "iecclone/bench.hpp"
#include "iecclone/compare.hpp"
#include "iecclone/family.hpp"
#include "iecclone/matching.hpp"
#include "iecclone/mutation.hpp"
#include "iecclone/plcopen.hpp"

using namespace iecclone;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string sample(const std::string& name) {
  return std::string(IECCLONE_DATA_DIR) + "/samples/" + name;
}

Project load(const std::string& name) { return loadProject(sample(name)).project; }

double secondsSince(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

void forEachNode(const FmNode& n, const std::function<void(const FmNode&, const FmNode*)>& f,
                 const FmNode* parent = nullptr) {
  f(n, parent);
  for (const auto& c : n.children) forEachNode(c, f, &n);
}

Outcome selfSimilarity() {
  Outcome o;
  const auto t0 = Clock::now();
  std::size_t checked = 0;
  for (const char* f : {"example.xml", "sfc_nested.xml", "ld_fbd.xml", "clones.xml"}) {
    Project p = load(f);
    for (auto kind : {BuiltinMetric::Coarse, BuiltinMetric::Fine}) {
      SimilarityTree t = compareInter(p, p, builtinMetric(kind));
      o.require(std::abs(t.similarity() - 1.0) <= 1e-9,
                std::string(f) + " similarity " + fmt("%.12f", t.similarity()));
      FamilyModel fm = buildFamilyModel(t, 1.0);
      forEachNode(fm.root, [&](const FmNode& n, const FmNode*) {
        o.require(n.category == Category::Mandatory, std::string(f) + " non-mandatory " + n.name);
      });
      ++checked;
    }
  }
  const double s = secondsSince(t0);
  o.require(s < 1.0, "took " + fmt("%.3f s", s));
  if (o.pass) o.detail = std::to_string(checked) + " comparisons, " + fmt("%.3f s", s);
  return o;
}

Outcome workedExample() {
  Outcome o;
  Project p = load("example.xml");
  Metric m = loadMetricFile(std::string(IECCLONE_DATA_DIR) + "/metrics/variables.json");
  CompareOptions opts;
  opts.retainUnmatched = true;
  const Pou& pou = p.pous.at(0);
  SimilarityTree t = compare(ArtifactRef{&pou}, ArtifactRef{&pou}, m.root, m, opts);
  const OptionNode* vars = nullptr;
  for (const auto& opt : t.root.options) {
    if (opt.type == ArtifactType::Variable) vars = &opt;
  }
  if (!vars) {
    o.require(false, "no variables option");
    return o;
  }
  std::vector<double> sims;
  for (const auto& pr : vars->pairs) sims.push_back(pr.similarity);
  o.require(sims == std::vector<double>{1.0, 0.5, 0.5, 1.0}, "pair similarities differ");
  std::vector<std::pair<std::size_t, std::size_t>> selected;
  for (const auto& pr : vars->pairs) {
    if (pr.selected) selected.emplace_back(pr.leftIndex, pr.rightIndex);
  }
  o.require(selected == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}},
            "selected edges differ");
  o.require(vars->similarity == 1.0, "option similarity " + fmt("%.4f", vars->similarity));
  if (o.pass) o.detail = "pairs {1.0, 0.5, 0.5, 1.0}, selected (A,A) (B,B), option 1.0";
  return o;
}

Outcome statementCount() {
  Outcome o;
  StBody a, b;
  for (int k = 0; k < 95; ++k) {
    Statement s;
    s.target = "x";
    s.value = Expression::literal(std::to_string(k), "INT");
    (k < 93 ? a.statements : b.statements).push_back(s);
    if (k < 93) b.statements.push_back(s);
  }
  const double v = evalAttribute("st-statement-count", ArtifactRef{&a}, ArtifactRef{&b});
  o.require(std::abs(v - 0.9789) <= 1e-4, fmt("%.6f", v));
  o.detail = "st-statement-count(93, 95) = " + fmt("%.4f", v);
  return o;
}

Outcome campaign() {
  Outcome o;
  std::vector<Project> seeds;
  for (const char* f : {"example.xml", "sfc_nested.xml", "ld_fbd.xml", "clones.xml"}) {
    seeds.push_back(load(f));
  }
  const Metric fine = builtinMetric(BuiltinMetric::Fine);
  const Metric coarse = builtinMetric(BuiltinMetric::Coarse);
  auto run = [&](MutationCategory cat, const Metric& m) {
    CampaignReport r = runCampaign(seeds, 1000, cat, m, 1.0, 42);
    o.require(r.elapsedSeconds <= 300.0, "campaign over 5 min");
    return r;
  };
  CampaignReport t2f = run(MutationCategory::T2, fine);
  CampaignReport t3f = run(MutationCategory::T3, fine);
  CampaignReport t2c = run(MutationCategory::T2, coarse);
  o.require(t2f.aggregate.precision == 1.0, "fine T2 precision " + fmt("%.4f", t2f.aggregate.precision));
  o.require(t3f.aggregate.precision == 1.0, "fine T3 precision " + fmt("%.4f", t3f.aggregate.precision));
  o.require(t3f.aggregate.recall >= 0.95, "fine T3 recall " + fmt("%.4f", t3f.aggregate.recall));
  o.require(t2f.aggregate.recall >= 0.75, "fine T2 recall " + fmt("%.4f", t2f.aggregate.recall));
  o.require(t2c.aggregate.recall <= 0.20, "coarse T2 recall " + fmt("%.4f", t2c.aggregate.recall));
  if (o.pass) {
    o.detail = "fine T2 P=" + fmt("%.4f", t2f.aggregate.precision) +
               " R=" + fmt("%.4f", t2f.aggregate.recall) +
               ", fine T3 P=" + fmt("%.4f", t3f.aggregate.precision) +
               " R=" + fmt("%.4f", t3f.aggregate.recall) +
               ", coarse T2 R=" + fmt("%.4f", t2c.aggregate.recall) +
               ", max " + fmt("%.2f s", std::max({t2f.elapsedSeconds, t3f.elapsedSeconds,
                                                  t2c.elapsedSeconds}));
  }
  return o;
}

double bruteForce(const std::vector<std::vector<double>>& w) {
  const std::size_t rows = w.size(), cols = w[0].size();
  const bool tr = rows > cols;
  const std::size_t small = tr ? cols : rows, large = tr ? rows : cols;
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double s = 0.0;
    for (std::size_t k = 0; k < small; ++k) s += tr ? w[perm[k]][k] : w[k][perm[k]];
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Outcome matchingOracle() {
  Outcome o;
  std::mt19937_64 rng(61131);
  std::uniform_int_distribution<int> dim(1, 6), grid(0, 10);
  std::uniform_real_distribution<double> low(0.0, 0.49);
  std::size_t trials = 0, identity = 0;
  double worst = 1.0;
  for (; trials < 2000; ++trials) {
    const bool ident = trials % 4 == 3;
    const std::size_t rows = dim(rng), cols = ident ? rows : dim(rng);
    std::vector<std::vector<double>> w(rows, std::vector<double>(cols));
    std::vector<MatchEdge> edges;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        w[i][j] = ident ? (i == j ? 1.0 : low(rng)) : grid(rng) / 10.0;
        edges.push_back({ArtifactPath({{"l", std::to_string(i)}}),
                         ArtifactPath({{"r", std::to_string(j)}}), w[i][j]});
      }
    }
    MatchResult r = greedyMatch(edges);
    std::set<std::string> usedL, usedR;
    double total = 0.0;
    for (const auto& e : r.selected) {
      o.require(usedL.insert(e.left.toString()).second && usedR.insert(e.right.toString()).second,
                "not independent");
      total += e.similarity;
    }
    for (const auto& e : edges) {
      if (e.similarity > 0.0 && !usedL.count(e.left.toString()) && !usedR.count(e.right.toString())) {
        o.require(false, "not maximal");
      }
    }
    const double opt = bruteForce(w);
    if (opt > 0.0) worst = std::min(worst, total / opt);
    o.require(total + 1e-12 >= 0.5 * opt, "below half of optimum");
    if (ident) {
      ++identity;
      o.require(std::abs(total - opt) <= 1e-12, "identity matrix not optimal");
    }
    if (!o.pass) break;
  }
  if (o.pass) {
    o.detail = std::to_string(trials) + " matrices (" + std::to_string(identity) +
               " identity-structured), worst ratio " + fmt("%.4f", worst);
  }
  return o;
}

Outcome nesting() {
  Outcome o;
  Project a = load("sfc_nested.xml"), b = load("sfc_nested_changed.xml");
  FamilyModel fm = buildFamilyModel(compareInter(a, b, builtinMetric(BuiltinMetric::Fine)), 1.0);
  const FmNode* action = nullptr;
  forEachNode(fm.root, [&](const FmNode& n, const FmNode*) {
    if (n.type == "action" && n.category == Category::Alternative) action = &n;
  });
  if (!action) {
    o.require(false, "no alternative action node");
    return o;
  }
  std::size_t flagged = 0, mandatory = 0;
  std::string changed;
  forEachNode(*action, [&](const FmNode& n, const FmNode* parent) {
    if (n.type != "statement" || !parent || parent->type != "stBody") return;
    if (n.category == Category::Mandatory) {
      ++mandatory;
    } else {
      ++flagged;
      changed = n.name;
    }
  });
  o.require(flagged == 1, std::to_string(flagged) + " statements flagged");
  o.require(mandatory >= 1, "no mandatory siblings");
  if (o.pass) {
    o.detail = "action " + action->name + " alternative; flagged '" + changed + "'; " +
               std::to_string(mandatory) + " siblings mandatory";
  }
  return o;
}

Outcome scaling() {
  Outcome o;
  std::vector<std::size_t> sizes;
  for (std::size_t n = 4; n <= 40; n += 4) sizes.push_back(n);
  sizes.push_back(42);
  BenchResult r = runGeneratedBench(sizes, GeneratorOptions{}, builtinMetric(BuiltinMetric::Fine), 5);
  const BenchRow& last = r.rows.back();
  o.require(r.correlation >= 0.95, "correlation " + fmt("%.4f", r.correlation));
  if (!o.pass) o.detail += "\n" + benchReportText(r);
  o.require(last.pairs >= 380000, "largest run only " + std::to_string(last.pairs) + " pairs");
  o.require(last.seconds < 10.0, "largest run " + fmt("%.3f s", last.seconds));
  o.detail = "correlation " + fmt("%.4f", r.correlation) + ", " + std::to_string(last.pairs) +
             " pairs in " + fmt("%.3f s", last.seconds);
  return o;
}

Outcome typeOne() {
  Outcome o;
  Project a = load("example.xml"), b = load("example_typeI.xml");
  o.require(a.pous == b.pous, "models differ");
  const double s = compareInter(a, b, builtinMetric(BuiltinMetric::Fine)).similarity();
  o.require(s == 1.0, "similarity " + fmt("%.6f", s));
  if (o.pass) o.detail = "equal models, similarity 1.0000";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"self-similarity", selfSimilarity}, {"worked example", workedExample},
      {"statement count", statementCount}, {"mutation campaign", campaign},
      {"matching oracle", matchingOracle}, {"nesting", nesting},
      {"scaling", scaling},                {"type I collapse", typeOne},
  };
  int failed = 0;
  int index = 1;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index++, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
