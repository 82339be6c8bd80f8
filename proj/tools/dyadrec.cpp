// dyadrec: weighted dyadic reciprocity toolkit.
//
// Exit codes: 0 success, 2 validation error, 3 I/O error,
// 4 degenerate-input warning escalated by --strict.

#include <fcntl.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dyadrec/errors.hpp"
#include "dyadrec/graph.hpp"
#include "dyadrec/ingest.hpp"
#include "dyadrec/metrics.hpp"
#include "dyadrec/nullmodels.hpp"
#include "dyadrec/report.hpp"
#include "dyadrec/synth.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dyadrec::cli {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitDegenerate = 4;

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool strict = false;
  std::string format = "json";
};

// Raised for degenerate inputs when --strict is set.
struct Degenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void warn(const Globals& g, const std::string& message) {
  std::cerr << "warning: " << message << "\n";
  if (g.strict) throw Degenerate(message);
}

ReportFormat report_format(const Globals& g) {
  return g.format == "csv" ? ReportFormat::Csv : ReportFormat::Json;
}

std::string fmt(double x) { return json(x).dump(); }

void write_text(const std::optional<fs::path>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path->string());
  out << text;
  if (!out) throw IoError("write failure for " + path->string());
}

Snapshot load(const Globals& g, const fs::path& path) {
  Snapshot snap = load_snapshot(path, IngestOptions{g.strict});
  if (snap.duplicate_rows > 0) {
    std::cerr << "warning: " << snap.duplicate_rows << " duplicate rows aggregated in "
              << path.string() << "\n";
  }
  if (snap.self_loops_dropped > 0) {
    std::cerr << "warning: " << snap.self_loops_dropped << " self-loops dropped in "
              << path.string() << "\n";
  }
  return snap;
}

Provenance tool_provenance(std::string regime, std::optional<std::uint64_t> seed) {
  Provenance p{{"tool", std::string("dyadrec ") + DYADREC_VERSION}, {"regime", std::move(regime)}};
  if (seed) p.emplace_back("seed", std::to_string(*seed));
  return p;
}

// Exclusive lock on an output directory, released on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / ".dyadrec.lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw IoError("output directory is locked by another run (" + path_.string() + ")");
    }
  }
  ~DirectoryLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

int run_ingest(const Globals& g, const std::vector<fs::path>& events, const fs::path& output) {
  const Aggregation agg = read_event_files(events, IngestOptions{g.strict}, g.threads);
  const auto& s = agg.stats;
  if (s.malformed_lines > 0) std::cerr << "warning: " << s.malformed_lines << " malformed lines skipped\n";
  if (s.self_calls_dropped > 0) std::cerr << "warning: " << s.self_calls_dropped << " self-calls dropped\n";
  save_snapshot(agg.graph, output, {{"tool", std::string("dyadrec ") + DYADREC_VERSION}, {"source", "ingest"}});
  json j = {{"events_read", s.events_read},
            {"self_calls_dropped", s.self_calls_dropped},
            {"malformed_lines", s.malformed_lines},
            {"aggregated_weight", s.aggregated_weight},
            {"vertices", s.vertices},
            {"arcs", s.arcs}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_census(const Globals& g, const fs::path& input) {
  const auto c = dyad_census(load(g, input).graph);
  if (g.format == "csv") {
    std::cout << "mutual,asymmetric,null_dyads,total_arcs\n"
              << c.mutual << "," << c.asymmetric << "," << c.null_dyads << "," << c.total_arcs << "\n";
  } else {
    std::cout << json{{"mutual", c.mutual},
                      {"asymmetric", c.asymmetric},
                      {"null_dyads", c.null_dyads},
                      {"total_arcs", c.total_arcs}}
                     .dump(2)
              << "\n";
  }
  return 0;
}

int run_reciprocity(const Globals& g, const fs::path& input, const std::optional<fs::path>& output,
                    const std::optional<fs::path>& histogram_out, double bin_width) {
  const WeightedDigraph graph = load(g, input).graph;
  const auto records = reciprocity_records(graph, g.threads);
  if (records.empty()) warn(g, "graph has no mutual dyads");
  std::string text = "a,b,w_ab,w_ba,p_ab,p_ba,r,class\n";
  for (const auto& rec : records) {
    text += graph.external_id(rec.dyad.a) + "," + graph.external_id(rec.dyad.b) + "," +
            fmt(rec.dyad.w_ab) + "," + fmt(rec.dyad.w_ba) + "," + fmt(rec.p_ab) + "," +
            fmt(rec.p_ba) + "," + fmt(rec.r_value) + "," + std::string(to_string(rec.dyad_class)) +
            "\n";
  }
  write_text(output, text);
  if (histogram_out) {
    const auto hist = reciprocity_distribution(records, bin_width);
    std::string h = "bin_low,bin_high,count\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
      h += fmt(hist.bin_low(i)) + "," + fmt(hist.bin_high(i)) + "," + std::to_string(hist.counts[i]) + "\n";
    }
    write_text(histogram_out, h);
  }
  return 0;
}

int run_concentration(const Globals& g, const fs::path& input, const std::optional<fs::path>& output) {
  const WeightedDigraph graph = load(g, input).graph;
  const auto scores = concentration_scores(graph);
  if (scores.empty()) warn(g, "no vertex has out-degree >= 2");
  std::string text = "vertex,out_degree,h,h_star\n";
  for (const auto& s : scores) {
    text += graph.external_id(s.vertex) + "," + std::to_string(s.out_degree) + "," + fmt(s.h) + "," +
            fmt(s.h_star) + "\n";
  }
  write_text(output, text);
  return 0;
}

int run_assortativity(const Globals& g, const fs::path& input, bool all_arcs) {
  const WeightedDigraph graph = load(g, input).graph;
  const auto scope = all_arcs ? AssortativityScope::AllArcs : AssortativityScope::MutualBackbone;
  json j = {{"scope", all_arcs ? "all_arcs" : "mutual_backbone"}};
  try {
    const auto res = degree_assortativity(graph, scope);
    j["r"] = res.r;
    j["pair_count"] = res.pair_count;
  } catch (const UndefinedCorrelation& e) {
    j["r"] = nullptr;
    j["error"] = e.what();
    std::cout << j.dump(2) << "\n";
    warn(g, std::string("assortativity undefined: ") + e.what());
    return 0;
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_equidisperse(const Globals& g, const fs::path& input, const fs::path& output) {
  const WeightedDigraph graph = load(g, input).graph;
  save_snapshot(equidisperse(graph), output, tool_provenance("observed_equidispersed", std::nullopt));
  return 0;
}

int run_rewire(const Globals& g, const fs::path& input, const fs::path& output, unsigned multiplier,
               bool drop_one_way) {
  const WeightedDigraph graph = load(g, input).graph;
  RegimeConfig cfg;
  cfg.destroy_assortativity = true;
  cfg.seed = g.seed;
  cfg.swap_multiplier = multiplier;
  cfg.keep_one_way_arcs = !drop_one_way;
  Rng rng(g.seed);
  const RewireOutcome out = maslov_sneppen_rewire(graph, cfg, rng);
  Provenance prov = tool_provenance("rewired", g.seed);
  prov.emplace_back("attempted_swaps", std::to_string(out.attempted_swaps));
  prov.emplace_back("accepted_swaps", std::to_string(out.accepted_swaps));
  prov.emplace_back("residual_assortativity",
                    out.residual_assortativity ? fmt(*out.residual_assortativity) : "undefined");
  save_snapshot(out.graph, output, prov);
  std::cout << json{{"attempted_swaps", out.attempted_swaps},
                    {"accepted_swaps", out.accepted_swaps},
                    {"residual_assortativity", out.residual_assortativity
                                                   ? json(*out.residual_assortativity)
                                                   : json(nullptr)},
                    {"stalled", out.stalled}}
                   .dump(2)
            << "\n";
  if (out.stalled) warn(g, "no swap could be accepted; output equals input topology");
  return 0;
}

int run_regimes(const Globals& g, const fs::path& input, const fs::path& out_dir, unsigned multiplier,
                unsigned replicas, bool save_graphs, double bin_width) {
  const WeightedDigraph graph = load(g, input).graph;
  fs::create_directories(out_dir);
  DirectoryLock lock(out_dir);
  AnalysisOptions opts;
  opts.bin_width = bin_width;
  opts.threads = g.threads;

  std::string replica_rows = "replica,seed,observed,observed_equidispersed,rewired,rewired_equidispersed,label\n";
  int status = 0;
  for (unsigned rep = 0; rep < std::max(1u, replicas); ++rep) {
    const std::uint64_t seed = g.seed + rep;
    FourRegimes regimes;
    const RegimeComparison cmp =
        run_regime_comparison(graph, seed, multiplier, opts, save_graphs && rep == 0 ? &regimes : nullptr);
    if (rep == 0) {
      for (Regime r : kAllRegimes) {
        const auto& report = cmp.reports[static_cast<std::size_t>(r)];
        if (!report) continue;
        const std::string ext = report_format(g) == ReportFormat::Csv ? ".csv" : ".json";
        write_report(*report, report_format(g), out_dir / (std::string(to_string(r)) + ".report" + ext));
      }
      write_text(out_dir / "comparison.json", emit_comparison_json(cmp));
      if (save_graphs && cmp.complete()) {
        for (Regime r : kAllRegimes) {
          Provenance prov = tool_provenance(std::string(to_string(r)), seed);
          prov.emplace_back("swap_multiplier", std::to_string(multiplier));
          prov.emplace_back("accepted_swaps", std::to_string(cmp.accepted_swaps));
          save_snapshot(regimes[r], out_dir / (std::string(to_string(r)) + ".csv"), prov);
        }
      }
    }
    if (!cmp.complete()) {
      std::cerr << "error: regime comparison failed: " << cmp.failure << "\n";
      return kExitValidation;
    }
    const auto& v = *cmp.verdict;
    replica_rows += std::to_string(rep) + "," + std::to_string(seed);
    for (double m : v.mean_r) replica_rows += "," + fmt(m);
    replica_rows += "," + v.label + "\n";
    if (rep == 0) {
      std::cout << "verdict: " << v.label << "\n";
      for (Regime r : kAllRegimes) {
        std::cout << "  " << to_string(r) << " mean R = " << fmt(v.mean_r[static_cast<std::size_t>(r)]) << "\n";
      }
    }
    if (cmp.stalled) warn(g, "rewiring stalled (no accepted swaps)");
    if (v.degenerate) status = g.strict ? kExitDegenerate : 0;
  }
  if (replicas > 1) write_text(out_dir / "replicas.csv", replica_rows);
  return status;
}

int run_synth(const Globals& g, SynthConfig cfg, const std::optional<double>& target_h_star,
              const fs::path& output) {
  if (target_h_star) cfg.dispersion = tune_dispersion(cfg, *target_h_star);
  const SynthResult res = generate(cfg);
  Provenance prov = tool_provenance("synthetic", cfg.seed);
  prov.emplace_back("dispersion", fmt(cfg.dispersion));
  prov.emplace_back("target_assortativity", fmt(cfg.target_assortativity));
  prov.emplace_back("achieved_assortativity",
                    res.achieved_assortativity ? fmt(*res.achieved_assortativity) : "undefined");
  save_snapshot(res.graph, output, prov);
  std::cout << json{{"vertices", res.graph.vertex_count()},
                    {"arcs", res.graph.arc_count()},
                    {"dispersion", cfg.dispersion},
                    {"mean_h_star", mean_h_star(res.graph)},
                    {"achieved_assortativity", res.achieved_assortativity
                                                   ? json(*res.achieved_assortativity)
                                                   : json(nullptr)},
                    {"target_reached", res.target_reached}}
                   .dump(2)
            << "\n";
  for (const auto& w : res.warnings) warn(g, w);
  return 0;
}

int run_report(const Globals& g, const fs::path& input, const std::optional<fs::path>& output,
               const std::string& regime, double bin_width, bool all_arcs) {
  const WeightedDigraph graph = load(g, input).graph;
  AnalysisOptions opts;
  opts.bin_width = bin_width;
  opts.threads = g.threads;
  opts.scope = all_arcs ? AssortativityScope::AllArcs : AssortativityScope::MutualBackbone;
  const AnalysisReport rep = analyze(graph, ReportProvenance{regime, std::nullopt, {}}, opts);
  if (output) {
    write_report(rep, report_format(g), *output);
  } else {
    std::cout << emit_report(rep, report_format(g));
  }
  if (rep.census.mutual == 0) warn(g, "graph has no mutual dyads");
  return 0;
}

unsigned default_threads() {
  if (const char* env = std::getenv("DYADREC_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid DYADREC_THREADS='" << env << "'\n";
  }
  return 1;
}

int main(int argc, char** argv) {
  CLI::App app{"Weighted dyadic reciprocity on directed communication graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("dyadrec ") + DYADREC_VERSION);

  Globals g;
  g.threads = default_threads();
  app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (default: $DYADREC_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--strict", g.strict, "Fail on malformed input and escalate degenerate warnings");
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  std::function<int()> action;

  auto* ingest = app.add_subcommand("ingest", "Aggregate call-event logs into a weighted graph");
  std::vector<fs::path> events;
  fs::path ingest_out;
  ingest->add_option("events", events, "events.csv files (timestamp,caller,callee)")
      ->required();
  ingest->add_option("-o,--output", ingest_out, "Output graph.csv")->required();
  ingest->callback([&] { action = [&] { return run_ingest(g, events, ingest_out); }; });

  fs::path input;
  std::optional<fs::path> output;
  const auto add_input = [&](CLI::App* sub) {
    sub->add_option("graph", input, "Graph snapshot (src,dst,weight)")->required();
  };

  auto* census = app.add_subcommand("census", "Mutual / asymmetric / null dyad counts");
  add_input(census);
  census->callback([&] { action = [&] { return run_census(g, input); }; });

  auto* recip = app.add_subcommand("reciprocity", "Per-dyad reciprocity records");
  add_input(recip);
  std::optional<fs::path> hist_out;
  double bin_width = kDefaultBinWidth;
  recip->add_option("-o,--output", output, "Records CSV (default stdout)");
  recip->add_option("--histogram", hist_out, "Also write the R histogram CSV here");
  recip->add_option("--bin-width", bin_width, "Histogram bin width in nats")->capture_default_str();
  recip->callback([&] { action = [&] { return run_reciprocity(g, input, output, hist_out, bin_width); }; });

  auto* conc = app.add_subcommand("concentration", "H and H* for vertices with out-degree >= 2");
  add_input(conc);
  conc->add_option("-o,--output", output, "CSV output (default stdout)");
  conc->callback([&] { action = [&] { return run_concentration(g, input, output); }; });

  auto* assort = app.add_subcommand("assortativity", "Excess-degree assortativity");
  add_input(assort);
  bool all_arcs = false;
  assort->add_flag("--all-arcs", all_arcs, "Use every arc instead of the mutual backbone");
  assort->callback([&] { action = [&] { return run_assortativity(g, input, all_arcs); }; });

  auto* equi = app.add_subcommand("equidisperse", "Split each vertex's strength equally over its arcs");
  add_input(equi);
  fs::path required_out;
  equi->add_option("-o,--output", required_out, "Output graph.csv")->required();
  equi->callback([&] { action = [&] { return run_equidisperse(g, input, required_out); }; });

  auto* rewire = app.add_subcommand("rewire", "Degree-preserving rewiring of the mutual backbone");
  add_input(rewire);
  unsigned multiplier = 10;
  bool drop_one_way = false;
  rewire->add_option("-o,--output", required_out, "Output graph.csv")->required();
  rewire->add_option("--swap-multiplier", multiplier, "Attempted swaps per backbone edge")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rewire->add_flag("--drop-one-way", drop_one_way, "Discard one-way arcs");
  rewire->callback([&] { action = [&] { return run_rewire(g, input, required_out, multiplier, drop_one_way); }; });

  auto* regimes = app.add_subcommand("regimes", "Build and compare the four regimes");
  add_input(regimes);
  fs::path out_dir;
  unsigned replicas = 1;
  bool save_graphs = false;
  regimes->add_option("--out-dir", out_dir, "Directory for reports")->required();
  regimes->add_option("--swap-multiplier", multiplier, "Attempted swaps per backbone edge")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  regimes->add_option("--replicas", replicas, "Independent rewiring seeds (seed, seed+1, ...)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  regimes->add_flag("--save-graphs", save_graphs, "Also write the four regime graphs");
  regimes->add_option("--bin-width", bin_width, "Histogram bin width in nats")->capture_default_str();
  regimes->callback([&] {
    action = [&] { return run_regimes(g, input, out_dir, multiplier, replicas, save_graphs, bin_width); };
  });

  auto* synth = app.add_subcommand("synth", "Generate a synthetic mutual call graph");
  SynthConfig cfg;
  std::optional<fs::path> config_path;
  std::string model = "powerlaw";
  std::optional<double> target_h_star;
  fs::path synth_out;
  synth->add_option("--config", config_path, "JSON config; flags given explicitly override it");
  auto* o_vertices = synth->add_option("--vertices", cfg.vertex_count, "Vertex count");
  auto* o_model = synth->add_option("--degree-model", model, "powerlaw | poisson | regular")
                      ->check(CLI::IsMember({"powerlaw", "poisson", "regular"}));
  auto* o_param = synth->add_option("--degree-param", cfg.degrees.parameter,
                                    "Exponent, mean, or common degree");
  auto* o_min = synth->add_option("--min-degree", cfg.degrees.min_degree, "Minimum degree");
  auto* o_max = synth->add_option("--max-degree", cfg.degrees.max_degree, "Maximum degree (0 = sqrt(V))");
  auto* o_r = synth->add_option("--target-r", cfg.target_assortativity, "Target assortativity");
  auto* o_disp = synth->add_option("--dispersion", cfg.dispersion, "Weight dispersion in [0, 1)");
  synth->add_option("--target-mean-hstar", target_h_star, "Tune dispersion to this mean H*")
      ->excludes(o_disp);
  synth->add_option("-o,--output", synth_out, "Output graph.csv")->required();
  synth->callback([&] {
    action = [&] {
      SynthConfig merged = cfg;
      if (config_path) {
        std::ifstream in(*config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        merged = synth_config_from_json(buf.str());
        if (o_vertices->count()) merged.vertex_count = cfg.vertex_count;
        if (o_param->count()) merged.degrees.parameter = cfg.degrees.parameter;
        if (o_min->count()) merged.degrees.min_degree = cfg.degrees.min_degree;
        if (o_max->count()) merged.degrees.max_degree = cfg.degrees.max_degree;
        if (o_r->count()) merged.target_assortativity = cfg.target_assortativity;
        if (o_disp->count()) merged.dispersion = cfg.dispersion;
      }
      if (o_model->count() || !config_path) {
        merged.degrees.model = model == "poisson"   ? DegreeModel::Poisson
                               : model == "regular" ? DegreeModel::Regular
                                                    : DegreeModel::PowerLaw;
      }
      merged.seed = g.seed;
      return run_synth(g, merged, target_h_star, synth_out);
    };
  });

  auto* report = app.add_subcommand("report", "Full analysis report for one graph");
  add_input(report);
  std::string regime_label = "observed";
  report->add_option("-o,--output", output, "Report file (default stdout)");
  report->add_option("--regime", regime_label, "Regime label recorded in provenance")->capture_default_str();
  report->add_option("--bin-width", bin_width, "Histogram bin width in nats")->capture_default_str();
  report->add_flag("--all-arcs", all_arcs, "Assortativity over every arc");
  report->callback([&] {
    action = [&] { return run_report(g, input, output, regime_label, bin_width, all_arcs); };
  });

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    return action();
  } catch (const Degenerate& e) {
    std::cerr << "error: degenerate input (strict): " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UndefinedCorrelation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return g.strict ? kExitDegenerate : kExitValidation;
  } catch (const std::logic_error& e) {
    // invalid_argument, domain_error, out_of_range, IntegrityError
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dyadrec::cli

int main(int argc, char** argv) { return dyadrec::cli::main(argc, argv); }
