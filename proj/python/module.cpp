#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "iecclone/compare.hpp"
#include "iecclone/family.hpp"
#include "iecclone/matching.hpp"
#include "iecclone/mutation.hpp"
#include "iecclone/plcopen.hpp"

namespace py = pybind11;
using namespace iecclone;

namespace {

Metric metricOf(const std::string& spec) {
  if (auto builtin = builtinMetricFromString(spec)) return builtinMetric(*builtin);
  Metric m = loadMetricFile(spec);
  validateMetric(m);
  return m;
}

MutationCategory categoryOf(const std::string& name) {
  auto c = mutationCategoryFromString(name);
  if (!c) throw std::invalid_argument("unknown mutation category '" + name + "'");
  return *c;
}

ReportFormat formatOf(const std::string& name) {
  auto f = reportFormatFromString(name);
  if (!f) throw std::invalid_argument("unknown report format '" + name + "'");
  return *f;
}

py::dict outcomeDict(const EvalOutcome& o) {
  py::dict d;
  d["tp"] = o.tp;
  d["fp"] = o.fp;
  d["fn"] = o.fn;
  d["precision"] = o.precision;
  d["recall"] = o.recall;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "IEC 61131-3 clone detection and variability analysis";

  auto base = py::register_exception<std::runtime_error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<MetricValidationError>(m, "MetricError", base.ptr());
  py::register_exception<MutationError>(m, "MutationError", base.ptr());
  py::register_exception<FamilyModelError>(m, "FamilyModelError", PyExc_ValueError);

  py::class_<Project>(m, "Project")
      .def_readonly("name", &Project::name)
      .def_property_readonly("pou_names",
                             [](const Project& p) {
                               std::vector<std::string> names;
                               for (const auto& pou : p.pous) names.push_back(pou.name);
                               return names;
                             })
      .def("to_xml", &writeProject)
      .def("save", &saveProject, py::arg("path"))
      .def("check", &checkInvariants)
      .def(py::self == py::self)
      .def("__repr__", [](const Project& p) {
        return "<Project " + p.name + " (" + std::to_string(p.pous.size()) + " POUs)>";
      });

  m.def("load_project", [](const std::string& path) { return loadProject(path).project; },
        py::arg("path"));
  m.def("parse_project", [](const std::string& xml) { return parseProject(xml).project; },
        py::arg("xml"));

  m.def("similarity",
        [](const Project& a, const Project& b, const std::string& metric) {
          return compareInter(a, b, metricOf(metric)).similarity();
        },
        py::arg("left"), py::arg("right"), py::arg("metric") = "fine");

  m.def("family_model",
        [](const Project& a, const Project& b, const std::string& metric, double lambda,
           const std::string& format) {
          SimilarityTree t = compareInter(a, b, metricOf(metric));
          return emitReport(buildFamilyModel(t, lambda), formatOf(format));
        },
        py::arg("left"), py::arg("right"), py::arg("metric") = "fine",
        py::arg("lambda_") = kDefaultLambda, py::arg("format") = "json");

  m.def("clone_candidates",
        [](const Project& p, const std::string& metric, double threshold, unsigned jobs) {
          CompareOptions opts;
          opts.ignoreRootPouName = true;
          std::vector<SimilarityTree> trees;
          {
            py::gil_scoped_release release;
            trees = compareIntra(p, metricOf(metric), opts, jobs);
          }
          py::list out;
          for (const auto& c : classifyClones(trees, threshold)) {
            out.append(py::make_tuple(c.leftPou.toString(), c.rightPou.toString(), c.similarity,
                                      std::string(toString(c.label))));
          }
          return out;
        },
        py::arg("project"), py::arg("metric") = "fine",
        py::arg("threshold") = kDefaultCloneThreshold, py::arg("jobs") = 1);

  m.def("mutate",
        [](const Project& seed, const std::string& category, std::size_t count,
           std::uint64_t seedValue) {
          Mutant mt = mutate(seed, categoryOf(category), count, seedValue);
          return py::make_tuple(mt.project, mutationContextJson(mt.context));
        },
        py::arg("seed"), py::arg("category"), py::arg("count") = 1, py::arg("rng_seed") = 0);

  m.def("evaluate",
        [](const Project& seed, const Project& mutant, const std::string& context,
           const std::string& metric, double lambda) {
          return outcomeDict(evaluateDetection(seed, mutant, parseMutationContextJson(context),
                                               metricOf(metric), lambda));
        },
        py::arg("seed"), py::arg("mutant"), py::arg("context"), py::arg("metric") = "fine",
        py::arg("lambda_") = kDefaultLambda);

  m.def("campaign",
        [](const std::vector<Project>& seeds, std::size_t iterations, const std::string& category,
           const std::string& metric, double lambda, std::uint64_t rngSeed, unsigned jobs) {
          CampaignReport r;
          const Metric mt = metricOf(metric);
          const MutationCategory cat = categoryOf(category);
          {
            py::gil_scoped_release release;
            r = runCampaign(seeds, iterations, cat, mt, lambda, rngSeed, jobs);
          }
          py::dict d = outcomeDict(r.aggregate);
          d["iterations"] = r.iterations;
          d["seconds"] = r.elapsedSeconds;
          return d;
        },
        py::arg("seeds"), py::arg("iterations") = 1000, py::arg("category") = "t3",
        py::arg("metric") = "fine", py::arg("lambda_") = kDefaultLambda, py::arg("rng_seed") = 0,
        py::arg("jobs") = 1);

  m.def("greedy_match",
        [](const std::vector<std::vector<double>>& weights) {
          std::vector<IndexedEdge> edges;
          std::size_t cols = 0;
          for (std::size_t i = 0; i < weights.size(); ++i) {
            cols = std::max(cols, weights[i].size());
            for (std::size_t j = 0; j < weights[i].size(); ++j) edges.push_back({i, j, weights[i][j]});
          }
          std::vector<std::size_t> left(weights.size()), right(cols);
          for (std::size_t i = 0; i < left.size(); ++i) left[i] = i;
          for (std::size_t j = 0; j < right.size(); ++j) right[j] = j;
          std::vector<std::tuple<std::size_t, std::size_t, double>> out;
          for (const auto& e : greedySelect(std::move(edges), left, right)) {
            out.emplace_back(e.left, e.right, e.similarity);
          }
          return out;
        },
        py::arg("weights"));

  m.def("attribute_catalog", [] {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& a : attributeCatalog()) {
      out.emplace_back(std::string(a.id), std::string(toString(a.type)), std::string(a.description));
    }
    return out;
  });
}
