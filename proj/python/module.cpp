#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dyadrec/errors.hpp"
#include "dyadrec/graph.hpp"
#include "dyadrec/ingest.hpp"
#include "dyadrec/metrics.hpp"
#include "dyadrec/nullmodels.hpp"
#include "dyadrec/report.hpp"
#include "dyadrec/synth.hpp"

namespace py = pybind11;
using namespace dyadrec;

namespace {

WeightedDigraph graph_from_arcs(std::size_t n, const std::vector<std::tuple<VertexId, VertexId, double>>& arcs) {
  GraphBuilder b(n);
  for (const auto& [s, t, w] : arcs) b.add_arc(s, t, w);
  return b.finalize();
}

py::dict census_dict(const DyadCensus& c) {
  py::dict d;
  d["mutual"] = c.mutual;
  d["asymmetric"] = c.asymmetric;
  d["null_dyads"] = c.null_dyads;
  d["total_arcs"] = c.total_arcs;
  return d;
}

py::object json_to_py(const std::string& text) {
  return py::module_::import("json").attr("loads")(text);
}

}  // namespace

PYBIND11_MODULE(_dyadrec, m) {
  m.doc() = "Weighted dyadic reciprocity on directed graphs";
  m.attr("__version__") = DYADREC_VERSION;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<UndefinedCorrelation>(m, "UndefinedCorrelation", PyExc_ArithmeticError);
  py::register_exception<IntegrityError>(m, "IntegrityError", PyExc_RuntimeError);

  py::class_<WeightedDigraph>(m, "Graph")
      .def(py::init(&graph_from_arcs), py::arg("vertex_count"), py::arg("arcs"),
           "Build from (source, target, weight) triples; duplicates are summed.")
      .def_property_readonly("vertex_count", &WeightedDigraph::vertex_count)
      .def_property_readonly("arc_count", &WeightedDigraph::arc_count)
      .def("out_degree", &WeightedDigraph::out_degree)
      .def("out_strength", &WeightedDigraph::out_strength)
      .def("weight", &WeightedDigraph::weight, py::arg("source"), py::arg("target"))
      .def("external_id", &WeightedDigraph::external_id)
      .def("arcs",
           [](const WeightedDigraph& g) {
             std::vector<std::tuple<VertexId, VertexId, double>> out;
             for (const Arc& a : g.arcs()) out.emplace_back(a.source, a.target, a.weight);
             return out;
           })
      .def("__eq__", [](const WeightedDigraph& a, const WeightedDigraph& b) { return a == b; })
      .def("__repr__", [](const WeightedDigraph& g) {
        return "<dyadrec.Graph vertices=" + std::to_string(g.vertex_count()) +
               " arcs=" + std::to_string(g.arc_count()) + ">";
      });

  m.def("census", [](const WeightedDigraph& g) { return census_dict(dyad_census(g)); });

  m.def("reciprocity",
        [](const WeightedDigraph& g, VertexId a, VertexId b) { return reciprocity(g, a, b).r_value; },
        py::arg("graph"), py::arg("a"), py::arg("b"));
  m.def("reciprocity_from_weights", &reciprocity_from_weights, py::arg("w_ab"), py::arg("w_ba"),
        py::arg("s_a"), py::arg("s_b"));
  m.def("classify", [](double r) { return std::string(to_string(classify(r))); });
  m.def("equidispersion_prediction", &equidispersion_prediction, py::arg("k_a"), py::arg("k_b"));
  m.def(
      "reciprocity_records",
      [](const WeightedDigraph& g, unsigned threads) {
        py::list out;
        for (const auto& r : reciprocity_records(g, threads)) {
          out.append(py::make_tuple(r.dyad.a, r.dyad.b, r.dyad.w_ab, r.dyad.w_ba, r.p_ab, r.p_ba, r.r_value,
                                    std::string(to_string(r.dyad_class))));
        }
        return out;
      },
      py::arg("graph"), py::arg("threads") = 1,
      "List of (a, b, w_ab, w_ba, p_ab, p_ba, r, class) with a < b.");

  m.def(
      "concentration",
      [](const WeightedDigraph& g, VertexId v) {
        const auto c = concentration(g, v);
        return py::make_tuple(c.h, c.h_star);
      },
      "(H, H*) for a vertex with out-degree >= 2.");
  m.def("concentration_of", [](const std::vector<double>& w) {
    const auto c = concentration_of(w);
    return py::make_tuple(c.h, c.h_star);
  });
  m.def(
      "assortativity",
      [](const WeightedDigraph& g, bool all_arcs) {
        return degree_assortativity(g, all_arcs ? AssortativityScope::AllArcs : AssortativityScope::MutualBackbone)
            .r;
      },
      py::arg("graph"), py::arg("all_arcs") = false);

  m.def("equidisperse", &equidisperse);
  m.def(
      "rewire",
      [](const WeightedDigraph& g, std::uint64_t seed, unsigned swap_multiplier, bool keep_one_way_arcs) {
        RegimeConfig cfg;
        cfg.destroy_assortativity = true;
        cfg.seed = seed;
        cfg.swap_multiplier = swap_multiplier;
        cfg.keep_one_way_arcs = keep_one_way_arcs;
        Rng rng(seed);
        return maslov_sneppen_rewire(g, cfg, rng).graph;
      },
      py::arg("graph"), py::arg("seed") = 1, py::arg("swap_multiplier") = 10, py::arg("keep_one_way_arcs") = true);
  m.def(
      "four_regimes",
      [](const WeightedDigraph& g, std::uint64_t seed, unsigned swap_multiplier) {
        const FourRegimes fr = four_regimes(g, seed, swap_multiplier);
        py::dict d;
        for (Regime r : kAllRegimes) d[py::str(std::string(to_string(r)))] = fr[r];
        return d;
      },
      py::arg("graph"), py::arg("seed") = 1, py::arg("swap_multiplier") = 10);

  m.def(
      "analyze",
      [](const WeightedDigraph& g, const std::string& regime, double bin_width) {
        AnalysisOptions opts;
        opts.bin_width = bin_width;
        return json_to_py(emit_report(analyze(g, ReportProvenance{regime, std::nullopt, {}}, opts),
                                      ReportFormat::Json));
      },
      py::arg("graph"), py::arg("regime") = "observed", py::arg("bin_width") = kDefaultBinWidth,
      "Analysis report as a dict.");
  m.def(
      "compare_regimes",
      [](const WeightedDigraph& g, std::uint64_t seed, unsigned swap_multiplier) {
        return json_to_py(emit_comparison_json(run_regime_comparison(g, seed, swap_multiplier)));
      },
      py::arg("graph"), py::arg("seed") = 1, py::arg("swap_multiplier") = 10);

  m.def(
      "load_snapshot",
      [](const std::filesystem::path& p, bool strict) { return load_snapshot(p, IngestOptions{strict}).graph; },
      py::arg("path"), py::arg("strict") = false);
  m.def(
      "save_snapshot",
      [](const WeightedDigraph& g, const std::filesystem::path& p) { save_snapshot(g, p); }, py::arg("graph"),
      py::arg("path"));
  m.def(
      "ingest",
      [](const std::vector<std::filesystem::path>& paths, bool strict, unsigned threads) {
        Aggregation agg = read_event_files(paths, IngestOptions{strict}, threads);
        py::dict stats;
        stats["events_read"] = agg.stats.events_read;
        stats["self_calls_dropped"] = agg.stats.self_calls_dropped;
        stats["malformed_lines"] = agg.stats.malformed_lines;
        stats["aggregated_weight"] = agg.stats.aggregated_weight;
        return py::make_tuple(std::move(agg.graph), stats);
      },
      py::arg("paths"), py::arg("strict") = false, py::arg("threads") = 1);

  m.def(
      "synth",
      [](const std::string& config_json) {
        SynthResult res = generate(synth_config_from_json(config_json));
        py::object achieved = py::none();
        if (res.achieved_assortativity) achieved = py::float_(*res.achieved_assortativity);
        return py::make_tuple(std::move(res.graph), achieved);
      },
      py::arg("config_json") = "{}", "Returns (graph, achieved assortativity).");
  m.def("mean_h_star", &mean_h_star);
}
