#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cxrils/config.hpp"
#include "cxrils/json_io.hpp"
#include "cxrils/pipeline.hpp"
#include "cxrils/report.hpp"
#include "cxrils/synth.hpp"

namespace py = pybind11;
using namespace cxrils;

namespace {

std::string structure_json(const std::string& text) {
  auto r = structure_report(text);
  return json{{"findings", r.findings}, {"unknown_phrases", r.unknown_phrases}}.dump();
}

std::string map_json(const std::vector<std::string>& phrases) {
  auto m = map_locations(phrases);
  return json{{"labels", m.labels}, {"unknown", m.unknown}}.dump();
}

std::string run_json(const std::string& manifest, const std::string& out, int jobs,
                     const std::string& config_path) {
  RunOptions opts;
  opts.parallelism = jobs;
  if (!config_path.empty()) opts.config = load_config(config_path);
  RunSummary s;
  {
    py::gil_scoped_release release;
    s = run_pipeline(manifest, out, opts);
  }
  return json{{"studies", s.studies},     {"grounded", s.grounded}, {"qc_excluded", s.qc_excluded},
              {"quarantined", s.quarantined}, {"reused", s.reused},   {"pairs", s.pairs}}
      .dump();
}

std::string synth_corpus(const std::string& root, int count, std::uint64_t seed, int jitter,
                         double confidence_noise) {
  CorpusOptions opts;
  opts.count = count;
  opts.seed = seed;
  opts.jitter = jitter;
  opts.confidence_noise = confidence_noise;
  return make_corpus(opts, root).manifest.string();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "cxrils native core";
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  m.def("structure_report_json", &structure_json, py::arg("text"));
  m.def("map_locations_json", &map_json, py::arg("phrases"));
  m.def("run_pipeline_json", &run_json, py::arg("manifest"), py::arg("out"), py::arg("jobs") = 1,
        py::arg("config") = "");
  m.def("make_corpus", &synth_corpus, py::arg("root"), py::arg("count"), py::arg("seed") = 1,
        py::arg("jitter") = 0, py::arg("confidence_noise") = 0.0);
  m.def("config_self_test", [] { return config_self_test().ok; });
  m.def("dump_config", [] { return dump_config(PipelineConfig{}); });
}
