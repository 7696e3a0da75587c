#include <gtest/gtest.h>

#include <algorithm>

#include "iecclone/mutation.hpp"
#include "iecclone/st_parser.hpp"
#include "test_data.hpp"

using namespace iecclone;

namespace {

const char* kSeeds[] = {"example.xml", "sfc_nested.xml", "ld_fbd.xml", "clones.xml"};

std::vector<Project> seeds() {
  std::vector<Project> out;
  for (const char* f : kSeeds) out.push_back(loadSample(f));
  return out;
}

}  // namespace

TEST(Mutation, SplitMixReferenceValues) {
  // First outputs of the reference generator seeded with 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(0x9e3779b97f4a7c15ULL), 0x6e789e6aa1b965f4ULL);
}

TEST(Mutation, FreshNameAndRename) {
  Project p = loadSample("example.xml");
  const std::string name = freshName(p, "VAR");
  EXPECT_EQ(name, "VAR1");
  auto records = renameVariable(p, ArtifactPath::fromString("pous/EXAMPLE/variables/B"), name);
  ASSERT_FALSE(records.empty());
  EXPECT_EQ(records[0].operatorId, MutationOperator::RenameVariable);
  EXPECT_EQ(p.pous[0].variables[1].name, "VAR1");
  EXPECT_EQ(printStructuredText(std::get<StBody>(p.pous[0].body.content)),
            "IF A THEN\n  VAR1 := FALSE;\nEND_IF;\n");
  EXPECT_TRUE(checkInvariants(p).empty());
  EXPECT_EQ(freshName(p, "VAR"), "VAR2");
  EXPECT_THROW(renameVariable(p, ArtifactPath::fromString("pous/EXAMPLE/variables/Q"), "Z"),
               MutationError);
}

TEST(Mutation, Deterministic) {
  Project s = loadSample("sfc_nested.xml");
  for (auto cat : {MutationCategory::T2, MutationCategory::T3}) {
    for (std::uint64_t r = 0; r < 20; ++r) {
      Mutant a = mutate(s, cat, 2, r), b = mutate(s, cat, 2, r);
      EXPECT_EQ(a.project, b.project);
      EXPECT_EQ(a.context, b.context);
    }
  }
}

TEST(Mutation, InvariantsPurityAndContext) {
  std::map<MutationOperator, std::size_t> seen;
  for (const Project& s : seeds()) {
    for (auto cat : {MutationCategory::T2, MutationCategory::T3}) {
      const auto& allowed = operatorsOf(cat);
      for (std::uint64_t r = 0; r < 60; ++r) {
        const std::size_t count = 1 + r % 3;
        Mutant m = mutate(s, cat, count, r);
        EXPECT_TRUE(checkInvariants(m.project).empty()) << s.name << " " << r;
        EXPECT_NE(m.project, s);
        EXPECT_EQ(m.context.category, cat);
        EXPECT_EQ(m.context.requested, count);
        EXPECT_LE(m.context.performed, count);
        EXPECT_GE(m.context.performed, 1u);
        for (const auto& rec : m.context.records) {
          EXPECT_NE(std::find(allowed.begin(), allowed.end(), rec.operatorId), allowed.end());
          EXPECT_EQ(categoryOf(rec.operatorId), cat);
          EXPECT_TRUE(rec.originPath || rec.mutantPath);
          if (rec.originPath) {
            EXPECT_TRUE(resolve(s, *rec.originPath).has_value());
          }
          if (rec.mutantPath) {
            EXPECT_TRUE(resolve(m.project, *rec.mutantPath).has_value());
          }
          ++seen[rec.operatorId];
        }
        EXPECT_EQ(parseMutationContextJson(mutationContextJson(m.context)), m.context);
      }
    }
  }
  // Every operator fires somewhere on the bundled seeds.
  for (auto cat : {MutationCategory::T2, MutationCategory::T3}) {
    for (auto op : operatorsOf(cat)) EXPECT_GT(seen[op], 0u) << toString(op);
  }
}

TEST(Mutation, T2KeepsShape) {
  Project s = loadSample("clones.xml");
  for (std::uint64_t r = 0; r < 50; ++r) {
    Mutant m = mutate(s, MutationCategory::T2, 1, r);
    ASSERT_EQ(m.project.pous.size(), s.pous.size());
    for (std::size_t k = 0; k < s.pous.size(); ++k) {
      EXPECT_EQ(m.project.pous[k].variables.size(), s.pous[k].variables.size());
      if (auto* a = std::get_if<StBody>(&s.pous[k].body.content)) {
        EXPECT_EQ(totalStatementCount(std::get<StBody>(m.project.pous[k].body.content)),
                  totalStatementCount(*a));
      }
    }
  }
}

TEST(Mutation, SiteCounts) {
  auto sites = mutationSites(loadSample("example.xml"));
  EXPECT_GT(sites[MutationOperator::RenameVariable], 0u);
  EXPECT_GT(sites[MutationOperator::AddStatement], 0u);
  EXPECT_EQ(sites[MutationOperator::AddSfcStep], 0u);
  EXPECT_GT(mutationSites(loadSample("sfc_nested.xml"))[MutationOperator::AddSfcStep], 0u);
}

TEST(Mutation, NoSitesThrows) {
  Project empty;
  empty.name = "Empty";
  EXPECT_THROW(mutate(empty, MutationCategory::T2, 1, 0), MutationError);
  EXPECT_THROW(mutate(loadSample("example.xml"), MutationCategory::T2, 0, 0), MutationError);
}

TEST(Mutation, NamesRoundTrip) {
  for (auto cat : {MutationCategory::T2, MutationCategory::T3}) {
    EXPECT_EQ(mutationCategoryFromString(toString(cat)), cat);
    for (auto op : operatorsOf(cat)) EXPECT_EQ(mutationOperatorFromString(toString(op)), op);
  }
}

TEST(Detection, FineMetricHasNoFalsePositives) {
  Metric fine = builtinMetric(BuiltinMetric::Fine);
  for (const Project& s : seeds()) {
    for (auto cat : {MutationCategory::T2, MutationCategory::T3}) {
      for (std::uint64_t r = 0; r < 100; ++r) {
        Mutant m = mutate(s, cat, 1, r);
        EvalOutcome o = evaluateDetection(s, m.project, m.context, fine);
        EXPECT_EQ(o.fp, 0u) << s.name << " " << toString(cat) << " " << r << " "
                            << (o.falsePositives.empty() ? "" : o.falsePositives[0]);
        EXPECT_EQ(o.tp + o.fn, m.context.records.size());
      }
    }
  }
}

TEST(Detection, IdenticalProjectsFlagNothing) {
  Project s = loadSample("sfc_nested.xml");
  MutationContext empty;
  empty.seedName = s.name;
  EvalOutcome o = evaluateDetection(s, s, empty, builtinMetric(BuiltinMetric::Fine));
  EXPECT_EQ(o.tp + o.fp + o.fn, 0u);
  EXPECT_EQ(o.precision, 1.0);
  EXPECT_EQ(o.recall, 1.0);
}

TEST(Detection, OutcomeArithmetic) {
  EvalOutcome o;
  o.tp = 3;
  o.fp = 1;
  o.fn = 2;
  o.finish();
  EXPECT_DOUBLE_EQ(o.precision, 0.75);
  EXPECT_DOUBLE_EQ(o.recall, 0.6);
}

TEST(Campaign, AggregateMatchesNaiveRecomputation) {
  auto s = seeds();
  for (auto metricKind : {BuiltinMetric::Fine, BuiltinMetric::Coarse}) {
    Metric m = builtinMetric(metricKind);
    for (auto cat : {MutationCategory::T2, MutationCategory::T3}) {
      const std::uint64_t rngSeed = 11;
      const std::size_t iterations = 60;
      CampaignReport rep = runCampaign(s, iterations, cat, m, 1.0, rngSeed, 2);
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < iterations; ++i) {
        const Project& seed = s[i % s.size()];
        Mutant mt = mutate(seed, cat, 1, splitmix64(rngSeed + i));
        EvalOutcome o = evaluateDetection(seed, mt.project, mt.context, m);
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
      }
      EXPECT_EQ(rep.iterations, iterations);
      EXPECT_EQ(rep.aggregate.tp, tp);
      EXPECT_EQ(rep.aggregate.fp, fp);
      EXPECT_EQ(rep.aggregate.fn, fn);
      const double precision = tp + fp == 0 ? 1.0 : double(tp) / double(tp + fp);
      const double recall = tp + fn == 0 ? 1.0 : double(tp) / double(tp + fn);
      EXPECT_DOUBLE_EQ(rep.aggregate.precision, precision);
      EXPECT_DOUBLE_EQ(rep.aggregate.recall, recall);
      std::size_t perOpMutations = 0;
      for (const auto& [op, st] : rep.perOperator) perOpMutations += st.mutations;
      EXPECT_EQ(perOpMutations, iterations);
    }
  }
}

TEST(Campaign, ReportIndependentOfJobs) {
  auto s = seeds();
  Metric m = builtinMetric(BuiltinMetric::Fine);
  auto a = runCampaign(s, 80, MutationCategory::T3, m, 1.0, 5, 1, 2);
  auto b = runCampaign(s, 80, MutationCategory::T3, m, 1.0, 5, 4, 2);
  EXPECT_EQ(campaignReportJson(a, false), campaignReportJson(b, false));
  EXPECT_EQ(campaignReportText(a, false), campaignReportText(b, false));
}
