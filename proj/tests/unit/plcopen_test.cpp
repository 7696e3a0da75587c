#include <gtest/gtest.h>

#include "iecclone/generator.hpp"
#include "iecclone/mutation.hpp"
#include "iecclone/plcopen.hpp"
#include "test_data.hpp"

using namespace iecclone;

namespace {

const char* kSamples[] = {"example.xml",    "example_variant.xml", "example_typeI.xml",
                          "sfc_nested.xml", "sfc_nested_changed.xml", "ld_fbd.xml",
                          "clones.xml",     "unrelated.xml"};

std::string wrap(const std::string& body) {
  return R"(<?xml version="1.0"?>
<project xmlns="http://www.plcopen.org/xml/tc6_0201" xmlns:xhtml="http://www.w3.org/1999/xhtml">
  <contentHeader name="T"/>
  <types><dataTypes/><pous>
    <pou name="P" pouType="program">
      <interface><localVars><variable name="x"><type><INT/></type></variable></localVars></interface>
      <body>)" + body + R"(</body>
    </pou>
  </pous></types>
</project>)";
}

}  // namespace

TEST(PlcOpen, ExampleModel) {
  Project p = loadSample("example.xml");
  EXPECT_EQ(p.name, "ExampleProject");
  ASSERT_EQ(p.pous.size(), 1u);
  const Pou& pou = p.pous[0];
  EXPECT_EQ(pou.name, "EXAMPLE");
  EXPECT_EQ(pou.kind, PouKind::Program);
  ASSERT_EQ(pou.variables.size(), 2u);
  EXPECT_EQ(pou.variables[0].name, "A");
  EXPECT_EQ(pou.variables[1].name, "B");
  EXPECT_EQ(pou.variables[1].dataType, "BOOL");
  const auto& body = std::get<StBody>(pou.body.content);
  ASSERT_EQ(body.statements.size(), 1u);
  EXPECT_EQ(body.statements[0].kind, StatementKind::If);
  EXPECT_EQ(body.statements[0].children.size(), 1u);
}

TEST(PlcOpen, SfcWithNestedBodies) {
  Project p = loadSample("sfc_nested.xml");
  const Pou& pou = p.pous.at(0);
  const auto& sfc = std::get<SfcBody>(pou.body.content);
  EXPECT_EQ(sfc.steps.size(), 3u);
  EXPECT_EQ(sfc.transitions.size(), 3u);
  EXPECT_TRUE(sfc.steps[0].initial);
  bool sawSt = false, sawLd = false;
  for (const auto& a : pou.actions) {
    sawSt |= a.body.language() == Language::ST;
    sawLd |= a.body.language() == Language::LD;
  }
  EXPECT_TRUE(sawSt);
  EXPECT_TRUE(sawLd);
  bool timed = false;
  for (const auto& s : sfc.steps) {
    for (const auto& a : s.actions) timed |= a.qualifier == ActionQualifier::D && !a.duration.empty();
  }
  EXPECT_TRUE(timed);
}

TEST(PlcOpen, GraphicalBodies) {
  Project p = loadSample("ld_fbd.xml");
  ASSERT_EQ(p.pous.size(), 2u);
  EXPECT_EQ(p.pous[0].body.language(), Language::LD);
  EXPECT_EQ(p.pous[1].body.language(), Language::FBD);
  const auto& fbd = std::get<FbdBody>(p.pous[1].body.content);
  bool nested = false;
  for (const auto& n : fbd.networks) nested |= n.nestedSt.has_value();
  EXPECT_TRUE(nested);
}

TEST(PlcOpen, WhitespaceAndCommentsCollapse) {
  EXPECT_EQ(loadSample("example.xml").pous, loadSample("example_typeI.xml").pous);
}

TEST(PlcOpen, MalformedXml) {
  EXPECT_THROW(parseProject("<project><types>"), ParseError);
}

TEST(PlcOpen, MalformedSt) {
  EXPECT_THROW(parseProject(wrap("<ST><xhtml:p>x := ;</xhtml:p></ST>")), ParseError);
}

TEST(PlcOpen, InstructionListRejected) {
  try {
    parseProject(wrap("<IL><xhtml:p>LD x</xhtml:p></IL>"));
    FAIL() << "no error";
  } catch (const UnsupportedConstructError& e) {
    EXPECT_EQ(e.construct(), "IL");
  }
}

TEST(PlcOpen, MissingFileIsParseError) {
  EXPECT_THROW(loadProject(samplePath("does_not_exist.xml")), ParseError);
}

TEST(PlcOpen, FallbackProjectName) {
  std::string doc = wrap("<ST><xhtml:p>x := 1;</xhtml:p></ST>");
  doc.replace(doc.find("<contentHeader name=\"T\"/>"), 25, "");
  EXPECT_EQ(parseProject(doc).project.name, kFallbackProjectName);
}

TEST(PlcOpenWriter, SamplesRoundTrip) {
  for (const char* f : kSamples) {
    Project p = loadSample(f);
    EXPECT_EQ(parseProject(writeProject(p)).project, p) << f;
  }
}

TEST(PlcOpenWriter, GeneratedProjectsRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GeneratorOptions o;
    o.pous = 8;
    o.seed = seed;
    Project p = generateProject(o);
    EXPECT_TRUE(checkInvariants(p).empty());
    EXPECT_EQ(parseProject(writeProject(p)).project, p) << seed;
  }
}

TEST(PlcOpenWriter, MutantsRoundTrip) {
  for (const char* f : kSamples) {
    Project seed = loadSample(f);
    for (auto cat : {MutationCategory::T2, MutationCategory::T3}) {
      for (std::uint64_t r = 0; r < 25; ++r) {
        Mutant m = mutate(seed, cat, 1 + r % 3, r);
        EXPECT_EQ(parseProject(writeProject(m.project)).project, m.project)
            << f << " " << toString(cat) << " " << r;
      }
    }
  }
}

TEST(PlcOpenWriter, OutputIsDeterministic) {
  Project p = loadSample("sfc_nested.xml");
  EXPECT_EQ(writeProject(p), writeProject(p));
}
