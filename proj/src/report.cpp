#include "dyadrec/report.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "dyadrec/errors.hpp"
#include "json.hpp"

namespace dyadrec {

using nlohmann::json;

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void value(T v) {
    bytes(&v, sizeof v);
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string format_number(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

constexpr std::array<std::string_view, 3> kClassKeys{"reciprocal", "partially_reciprocal",
                                                     "non_reciprocal"};

json census_json(const DyadCensus& c) {
  return {{"mutual", c.mutual},
          {"asymmetric", c.asymmetric},
          {"null_dyads", c.null_dyads},
          {"total_arcs", c.total_arcs}};
}

json report_json(const AnalysisReport& r) {
  json j;
  j["schema"] = kReportSchema;
  j["provenance"] = {{"regime", r.provenance.regime},
                     {"seed", r.provenance.seed ? json(*r.provenance.seed) : json(nullptr)},
                     {"input_digest", r.provenance.input_digest}};
  j["census"] = census_json(r.census);
  json shares = json::object();
  for (std::size_t i = 0; i < 3; ++i) shares[std::string(kClassKeys[i])] = r.class_proportions[i];
  j["class_proportions"] = shares;
  j["mean_r"] = r.mean_r;
  j["median_r"] = r.median_r;
  j["histogram"] = {{"bin_width", r.histogram.bin_width},
                    {"counts", r.histogram.counts},
                    {"class_counts", r.histogram.class_counts},
                    {"total", r.histogram.total}};
  if (r.assortativity) {
    j["assortativity"] = {{"r", r.assortativity->r}, {"pair_count", r.assortativity->pair_count}};
  } else {
    j["assortativity"] = nullptr;
  }
  json quantiles = json::array();
  for (const auto& qp : r.h_star_quantiles) quantiles.push_back({{"q", qp.q}, {"value", qp.value}});
  j["h_star"] = {{"vertices", r.h_star_vertices}, {"quantiles", quantiles}};
  return j;
}

AnalysisReport report_from(const json& j) {
  if (j.at("schema").get<int>() != kReportSchema) {
    throw ValidationError("unsupported report schema " + j.at("schema").dump());
  }
  AnalysisReport r;
  const auto& prov = j.at("provenance");
  r.provenance.regime = prov.at("regime").get<std::string>();
  if (!prov.at("seed").is_null()) r.provenance.seed = prov.at("seed").get<std::uint64_t>();
  r.provenance.input_digest = prov.at("input_digest").get<std::string>();
  const auto& c = j.at("census");
  r.census = {c.at("mutual").get<std::uint64_t>(), c.at("asymmetric").get<std::uint64_t>(),
              c.at("null_dyads").get<std::uint64_t>(), c.at("total_arcs").get<std::uint64_t>()};
  for (std::size_t i = 0; i < 3; ++i) {
    r.class_proportions[i] = j.at("class_proportions").at(std::string(kClassKeys[i])).get<double>();
  }
  r.mean_r = j.at("mean_r").get<double>();
  r.median_r = j.at("median_r").get<double>();
  const auto& h = j.at("histogram");
  r.histogram.bin_width = h.at("bin_width").get<double>();
  r.histogram.counts = h.at("counts").get<std::vector<std::uint64_t>>();
  r.histogram.class_counts = h.at("class_counts").get<std::array<std::uint64_t, 3>>();
  r.histogram.total = h.at("total").get<std::uint64_t>();
  if (!j.at("assortativity").is_null()) {
    r.assortativity = AssortativityResult{j["assortativity"].at("r").get<double>(),
                                          j["assortativity"].at("pair_count").get<std::size_t>()};
  }
  r.h_star_vertices = j.at("h_star").at("vertices").get<std::uint64_t>();
  for (const auto& qp : j.at("h_star").at("quantiles")) {
    r.h_star_quantiles.push_back({qp.at("q").get<double>(), qp.at("value").get<double>()});
  }
  return r;
}

std::string emit_csv(const AnalysisReport& r) {
  std::string out = "bin_low,bin_high,count\n";
  for (std::size_t i = 0; i < r.histogram.counts.size(); ++i) {
    out += format_number(r.histogram.bin_low(i)) + "," + format_number(r.histogram.bin_high(i)) +
           "," + std::to_string(r.histogram.counts[i]) + "\n";
  }
  out += "\nkey,value\n";
  const auto row = [&](std::string_view key, const std::string& value) {
    out += key;
    out += ',';
    out += value;
    out += '\n';
  };
  row("schema", std::to_string(kReportSchema));
  row("regime", r.provenance.regime);
  row("seed", r.provenance.seed ? std::to_string(*r.provenance.seed) : "");
  row("input_digest", r.provenance.input_digest);
  row("mutual", std::to_string(r.census.mutual));
  row("asymmetric", std::to_string(r.census.asymmetric));
  row("null_dyads", std::to_string(r.census.null_dyads));
  row("total_arcs", std::to_string(r.census.total_arcs));
  for (std::size_t i = 0; i < 3; ++i) {
    row("share_" + std::string(kClassKeys[i]), format_number(r.class_proportions[i]));
  }
  row("mean_r", format_number(r.mean_r));
  row("median_r", format_number(r.median_r));
  row("assortativity_r", r.assortativity ? format_number(r.assortativity->r) : "");
  row("assortativity_pairs", r.assortativity ? std::to_string(r.assortativity->pair_count) : "");
  row("h_star_vertices", std::to_string(r.h_star_vertices));
  for (const auto& qp : r.h_star_quantiles) {
    row("h_star_q" + format_number(qp.q), format_number(qp.value));
  }
  return out;
}

}  // namespace

std::string graph_digest(const WeightedDigraph& g) {
  Fnv1a h;
  h.value(static_cast<std::uint64_t>(g.vertex_count()));
  for (const Arc& arc : g.arcs()) {
    h.value(arc.source);
    h.value(arc.target);
    h.value(std::bit_cast<std::uint64_t>(arc.weight));
  }
  for (const auto& id : g.external_ids()) {
    h.bytes(id.data(), id.size());
    h.value('\n');
  }
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h.digest()));
  return std::string(buf.data(), 16);
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::domain_error("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

AnalysisReport analyze(const WeightedDigraph& g, const ReportProvenance& provenance,
                       const AnalysisOptions& options) {
  AnalysisReport rep;
  rep.provenance = provenance;
  rep.provenance.input_digest = graph_digest(g);
  rep.census = dyad_census(g);

  const auto records = reciprocity_records(g, options.threads);
  rep.histogram = reciprocity_distribution(records, options.bin_width);
  rep.class_proportions = rep.histogram.class_proportions();
  if (!records.empty()) {
    std::vector<double> values;
    values.reserve(records.size());
    double sum = 0.0;
    for (const auto& rec : records) {
      values.push_back(rec.r_value);
      sum += rec.r_value;
    }
    rep.mean_r = sum / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    rep.median_r = quantile(values, 0.5);
  }

  try {
    rep.assortativity = degree_assortativity(g, options.scope);
  } catch (const std::domain_error&) {
    rep.assortativity.reset();
  }

  const auto scores = concentration_scores(g);
  rep.h_star_vertices = scores.size();
  if (!scores.empty()) {
    std::vector<double> h;
    h.reserve(scores.size());
    for (const auto& s : scores) h.push_back(s.h_star);
    std::sort(h.begin(), h.end());
    for (double q : kHStarQuantiles) rep.h_star_quantiles.push_back({q, quantile(h, q)});
  }
  return rep;
}

std::string emit_report(const AnalysisReport& report, ReportFormat format) {
  if (format == ReportFormat::Csv) return emit_csv(report);
  return report_json(report).dump(2) + "\n";
}

AnalysisReport parse_report_json(std::string_view text) {
  try {
    return report_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report json: ") + e.what());
  }
}

void write_report(const AnalysisReport& report, ReportFormat format,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << emit_report(report, format);
  if (!out) throw IoError("write failure for " + path.string());
}

OrderingVerdict ordering_verdict(const std::array<AnalysisReport, 4>& reports) {
  OrderingVerdict v;
  for (std::size_t i = 0; i < 4; ++i) v.mean_r[i] = reports[i].mean_r;
  const auto at = [&](Regime r) { return v.mean_r[static_cast<std::size_t>(r)]; };
  const double obs = at(Regime::Observed);
  const double obs_eq = at(Regime::ObservedEquidispersed);
  const double rw = at(Regime::Rewired);
  const double rw_eq = at(Regime::RewiredEquidispersed);

  v.strict_ordering = obs_eq < rw_eq && rw_eq < obs && obs < rw;
  v.partial_ordering = obs_eq < std::min(rw_eq, obs) && std::max(rw_eq, obs) < rw;
  v.degenerate = obs == obs_eq && obs == rw && obs == rw_eq;

  const auto& first = reports[static_cast<std::size_t>(Regime::ObservedEquidispersed)];
  const auto& last = reports[static_cast<std::size_t>(Regime::Rewired)];
  v.extreme_share_increases = first.class_proportions[2] < last.class_proportions[2];
  v.reciprocal_share_decreases = first.class_proportions[0] > last.class_proportions[0];

  if (v.degenerate) {
    v.label = "degenerate: ties";
  } else if (v.strict_ordering) {
    v.label = "strict ordering";
  } else if (v.partial_ordering) {
    v.label = "partial ordering";
  } else {
    v.label = "ordering violated";
  }
  return v;
}

RegimeComparison run_regime_comparison(const WeightedDigraph& g, std::uint64_t seed,
                                       unsigned swap_multiplier, const AnalysisOptions& options,
                                       FourRegimes* regimes_out) {
  if (dyad_census(g).mutual == 0) {
    throw std::domain_error("regime comparison needs at least one mutual dyad");
  }
  RegimeComparison cmp;
  cmp.seed = seed;
  cmp.swap_multiplier = swap_multiplier;
  const auto provenance = [&](Regime r) {
    return ReportProvenance{std::string(to_string(r)), seed, {}};
  };
  const auto slot = [](Regime r) { return static_cast<std::size_t>(r); };

  try {
    cmp.reports[slot(Regime::Observed)] = analyze(g, provenance(Regime::Observed), options);
    cmp.reports[slot(Regime::ObservedEquidispersed)] =
        analyze(equidisperse(g), provenance(Regime::ObservedEquidispersed), options);

    FourRegimes regimes = four_regimes(g, seed, swap_multiplier);
    cmp.attempted_swaps = regimes.attempted_swaps;
    cmp.accepted_swaps = regimes.accepted_swaps;
    cmp.residual_assortativity = regimes.residual_assortativity;
    cmp.stalled = regimes.stalled;
    for (Regime r : {Regime::Rewired, Regime::RewiredEquidispersed}) {
      cmp.reports[slot(r)] = analyze(regimes[r], provenance(r), options);
    }
    if (regimes_out) *regimes_out = std::move(regimes);
  } catch (const std::exception& e) {
    cmp.failure = e.what();
    return cmp;
  }

  std::array<AnalysisReport, 4> done;
  for (std::size_t i = 0; i < 4; ++i) done[i] = *cmp.reports[i];
  cmp.verdict = ordering_verdict(done);
  return cmp;
}

std::string emit_comparison_json(const RegimeComparison& cmp) {
  json j;
  j["schema"] = kReportSchema;
  j["seed"] = cmp.seed;
  j["swap_multiplier"] = cmp.swap_multiplier;
  j["rewire"] = {{"attempted_swaps", cmp.attempted_swaps},
                 {"accepted_swaps", cmp.accepted_swaps},
                 {"residual_assortativity",
                  cmp.residual_assortativity ? json(*cmp.residual_assortativity) : json(nullptr)},
                 {"stalled", cmp.stalled}};
  json reports = json::object();
  for (Regime r : kAllRegimes) {
    const auto& rep = cmp.reports[static_cast<std::size_t>(r)];
    reports[std::string(to_string(r))] = rep ? report_json(*rep) : json(nullptr);
  }
  j["reports"] = reports;
  if (cmp.verdict) {
    const auto& v = *cmp.verdict;
    json means = json::object();
    for (Regime r : kAllRegimes) means[std::string(to_string(r))] = v.mean_r[static_cast<std::size_t>(r)];
    j["verdict"] = {{"mean_r", means},
                    {"strict_ordering", v.strict_ordering},
                    {"partial_ordering", v.partial_ordering},
                    {"degenerate", v.degenerate},
                    {"extreme_share_increases", v.extreme_share_increases},
                    {"reciprocal_share_decreases", v.reciprocal_share_decreases},
                    {"label", v.label}};
  } else {
    j["verdict"] = nullptr;
  }
  j["failure"] = cmp.failure.empty() ? json(nullptr) : json(cmp.failure);
  return j.dump(2) + "\n";
}

}  // namespace dyadrec
