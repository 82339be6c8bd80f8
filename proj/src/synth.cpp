#include "dyadrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "dyadrec/nullmodels.hpp"
#include "dyadrec/random.hpp"
#include "json.hpp"

namespace dyadrec {

namespace {

// Weight draws use their own stream so topology and weights can be
// regenerated independently.
constexpr std::uint64_t kWeightStream = 0x9e3779b97f4a7c15ULL;

void validate(const SynthConfig& cfg) {
  if (cfg.vertex_count < 2) throw std::invalid_argument("vertex_count must be >= 2");
  if (cfg.vertex_count > UINT32_MAX) throw std::invalid_argument("vertex_count too large");
  if (!(cfg.dispersion >= 0.0 && cfg.dispersion < 1.0)) {
    throw std::invalid_argument("dispersion must lie in [0, 1)");
  }
  if (!(cfg.target_assortativity > -1.0 && cfg.target_assortativity < 1.0)) {
    throw std::invalid_argument("target_assortativity must lie in (-1, 1)");
  }
  if (!(cfg.median_calls_per_neighbor > 0.0) || !(cfg.propensity_sigma >= 0.0)) {
    throw std::invalid_argument("propensity parameters must be positive");
  }
  if (!(cfg.degrees.parameter > 0.0)) throw std::invalid_argument("degree parameter must be > 0");
}

std::size_t max_degree_of(const SynthConfig& cfg) {
  std::size_t cap = cfg.degrees.max_degree;
  if (cap == 0) cap = static_cast<std::size_t>(std::sqrt(static_cast<double>(cfg.vertex_count)));
  cap = std::min(cap, cfg.vertex_count - 1);
  return std::max(cap, std::min(cfg.degrees.min_degree, cfg.vertex_count - 1));
}

class DegreeSampler {
 public:
  explicit DegreeSampler(const SynthConfig& cfg)
      : model_(cfg.degrees.model), param_(cfg.degrees.parameter) {
    hi_ = max_degree_of(cfg);
    lo_ = std::min(cfg.degrees.min_degree, hi_);
    if (model_ == DegreeModel::PowerLaw) {
      double total = 0.0;
      for (std::size_t k = std::max<std::size_t>(lo_, 1); k <= hi_; ++k) {
        total += std::pow(static_cast<double>(k), -param_);
        cdf_.push_back(total);
      }
      for (double& c : cdf_) c /= total;
      first_ = std::max<std::size_t>(lo_, 1);
    }
  }

  std::size_t draw(Rng& rng) const {
    switch (model_) {
      case DegreeModel::Regular: return static_cast<std::size_t>(param_);
      case DegreeModel::PowerLaw: {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
            it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
        return first_ + idx;
      }
      case DegreeModel::Poisson: {
        // Inverse transform; fine for the means used on desk-scale graphs.
        const double u = rng.uniform();
        double p = std::exp(-param_), cum = p;
        std::size_t k = 0;
        while (u > cum && k < hi_) {
          ++k;
          p *= param_ / static_cast<double>(k);
          cum += p;
        }
        return std::clamp(k, lo_, hi_);
      }
    }
    return lo_;
  }

 private:
  DegreeModel model_;
  double param_;
  std::size_t lo_ = 0, hi_ = 0, first_ = 1;
  std::vector<double> cdf_;
};

std::vector<std::size_t> degree_sequence(const SynthConfig& cfg, Rng& rng) {
  const std::size_t n = cfg.vertex_count;
  if (cfg.degrees.model == DegreeModel::Regular) {
    const auto k = static_cast<std::size_t>(cfg.degrees.parameter);
    if (static_cast<double>(k) != cfg.degrees.parameter || k >= n || (k * n) % 2 != 0) {
      throw std::invalid_argument("regular degree sequence is not graphical");
    }
    return std::vector<std::size_t>(n, k);
  }
  const DegreeSampler sampler(cfg);
  std::vector<std::size_t> degrees(n);
  std::size_t sum = 0;
  for (auto& k : degrees) {
    k = sampler.draw(rng);
    sum += k;
  }
  // Odd stub count: redraw single entries until the parity flips.
  for (int tries = 0; sum % 2 != 0; ++tries) {
    if (tries > 10000) throw std::invalid_argument("cannot draw an even-sum degree sequence");
    const auto v = static_cast<std::size_t>(rng.below(n));
    sum -= degrees[v];
    degrees[v] = sampler.draw(rng);
    sum += degrees[v];
  }
  return degrees;
}

std::uint64_t pair_key(VertexId u, VertexId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

// Configuration model pairing followed by swap repair of loops and
// repeated edges. Edges that cannot be repaired are dropped.
std::vector<UndirectedEdge> configuration_model(const std::vector<std::size_t>& degrees, Rng& rng,
                                                std::uint64_t& dropped) {
  std::vector<VertexId> stubs;
  for (VertexId v = 0; v < degrees.size(); ++v) stubs.insert(stubs.end(), degrees[v], v);
  rng.shuffle(std::span<VertexId>(stubs));
  std::vector<UndirectedEdge> edges;
  edges.reserve(stubs.size() / 2);
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) edges.push_back({stubs[i], stubs[i + 1]});
  if (edges.empty()) return edges;

  std::unordered_map<std::uint64_t, std::uint32_t> mult;
  mult.reserve(edges.size() * 2);
  for (const auto& e : edges) ++mult[pair_key(e.u, e.v)];
  const auto is_bad = [&](const UndirectedEdge& e) {
    return e.u == e.v || mult[pair_key(e.u, e.v)] > 1;
  };
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (is_bad(edges[i])) bad.push_back(i);
  }
  const std::uint64_t budget = 1000 + 200 * static_cast<std::uint64_t>(bad.size());
  for (std::uint64_t attempt = 0; !bad.empty() && attempt < budget; ++attempt) {
    const std::size_t i = bad.back();
    if (!is_bad(edges[i])) {
      bad.pop_back();
      continue;
    }
    const auto j = static_cast<std::size_t>(rng.below(edges.size()));
    if (j == i) continue;
    const auto [a, b] = edges[i];
    const auto [c, d] = edges[j];
    const bool cross = rng.below(2) == 1;
    const UndirectedEdge e1 = cross ? UndirectedEdge{a, c} : UndirectedEdge{a, d};
    const UndirectedEdge e2 = cross ? UndirectedEdge{b, d} : UndirectedEdge{c, b};
    if (e1.u == e1.v || e2.u == e2.v) continue;
    const auto k1 = pair_key(e1.u, e1.v), k2 = pair_key(e2.u, e2.v);
    if (k1 == k2 || mult[k1] > 0 || mult[k2] > 0) continue;
    --mult[pair_key(a, b)];
    --mult[pair_key(c, d)];
    ++mult[k1];
    ++mult[k2];
    edges[i] = e1;
    edges[j] = e2;
    bad.pop_back();
  }

  std::vector<UndirectedEdge> simple;
  simple.reserve(edges.size());
  std::unordered_map<std::uint64_t, bool> kept;
  for (const auto& e : edges) {
    if (e.u == e.v || !kept.emplace(pair_key(e.u, e.v), true).second) {
      ++dropped;
      continue;
    }
    simple.push_back(e);
  }
  return simple;
}

struct Topology {
  Backbone backbone;
  std::optional<double> achieved;
  bool reached = false;
  std::uint64_t swaps = 0;
  std::uint64_t dropped = 0;
};

Topology build_topology(const SynthConfig& cfg) {
  Rng rng(cfg.seed);
  const auto degrees = degree_sequence(cfg, rng);
  std::uint64_t dropped = 0;
  auto edges = configuration_model(degrees, rng, dropped);
  Topology topo{Backbone(cfg.vertex_count, std::move(edges)), std::nullopt, false, 0, dropped};
  Backbone& bb = topo.backbone;

  auto r = bb.assortativity();
  const double target = cfg.target_assortativity;
  const std::size_t m = bb.edge_count();
  if (r && m >= 2) {
    const std::uint64_t budget = static_cast<std::uint64_t>(cfg.tuning_multiplier) * m;
    for (std::uint64_t attempt = 0;
         attempt < budget && std::fabs(*r - target) > cfg.assortativity_tolerance; ++attempt) {
      const auto i = static_cast<std::size_t>(rng.below(m));
      const auto j = static_cast<std::size_t>(rng.below(m));
      if (i == j) continue;
      // Of the two re-pairings, take the valid one landing closest to target.
      std::optional<bool> best;
      double best_gap = std::fabs(*r - target);
      for (bool cross : {false, true}) {
        if (!bb.can_swap(i, j, cross)) continue;
        const auto next = bb.assortativity_after(bb.swap_delta(i, j, cross));
        if (next && std::fabs(*next - target) < best_gap) {
          best_gap = std::fabs(*next - target);
          best = cross;
        }
      }
      if (best) {
        bb.apply_swap(i, j, *best);
        ++topo.swaps;
        r = bb.assortativity();
      }
    }
  }
  topo.achieved = r;
  topo.reached = r && std::fabs(*r - target) <= cfg.assortativity_tolerance;
  return topo;
}

WeightedDigraph assign_weights(const Backbone& bb, const SynthConfig& cfg) {
  const std::size_t n = bb.vertex_count();
  std::vector<std::vector<VertexId>> neighbors(n);
  for (const auto& e : bb.edges()) {
    neighbors[e.u].push_back(e.v);
    neighbors[e.v].push_back(e.u);
  }
  const double beta = cfg.dispersion / (1.0 - cfg.dispersion);
  Rng rng(cfg.seed ^ kWeightStream);
  GraphBuilder builder(n);
  std::vector<double> z;
  for (VertexId v = 0; v < n; ++v) {
    auto& nb = neighbors[v];
    std::sort(nb.begin(), nb.end());
    const double propensity = cfg.median_calls_per_neighbor * std::exp(cfg.propensity_sigma * rng.normal());
    z.resize(nb.size());
    for (double& x : z) x = rng.normal();
    if (nb.empty()) continue;
    const double strength = propensity * static_cast<double>(nb.size());
    const double zmax = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double& x : z) {
      x = std::exp(beta * (x - zmax));
      total += x;
    }
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const double calls = std::max(1.0, std::round(strength * z[i] / total));
      builder.add_arc(v, nb[i], calls);
    }
  }
  return builder.finalize();
}

}  // namespace

SynthResult generate(const SynthConfig& cfg) {
  validate(cfg);
  Topology topo = build_topology(cfg);
  SynthResult out;
  out.graph = assign_weights(topo.backbone, cfg);
  out.achieved_assortativity = topo.achieved;
  out.target_reached = topo.reached;
  out.tuning_swaps = topo.swaps;
  out.edges_dropped = topo.dropped;
  if (!topo.reached) {
    out.warnings.push_back("assortativity target " + std::to_string(cfg.target_assortativity) +
                           " not reached; achieved " +
                           (topo.achieved ? std::to_string(*topo.achieved) : std::string("undefined")));
  }
  if (topo.dropped > 0) {
    out.warnings.push_back(std::to_string(topo.dropped) + " unrepairable multi-edges dropped");
  }
  return out;
}

double mean_h_star(const WeightedDigraph& g) {
  const auto scores = concentration_scores(g);
  if (scores.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : scores) total += s.h_star;
  return total / static_cast<double>(scores.size());
}

double tune_dispersion(const SynthConfig& cfg, double target_mean_h_star, double tolerance) {
  if (!(target_mean_h_star >= 0.0 && target_mean_h_star < 1.0)) {
    throw std::invalid_argument("target mean H* must lie in [0, 1)");
  }
  validate(cfg);
  const Topology topo = build_topology(cfg);
  SynthConfig trial = cfg;
  double lo = 0.0, hi = 0.999;
  double best = 0.0, best_gap = 2.0;
  for (int iter = 0; iter < 40; ++iter) {
    trial.dispersion = 0.5 * (lo + hi);
    const double h = mean_h_star(assign_weights(topo.backbone, trial));
    const double gap = std::fabs(h - target_mean_h_star);
    if (gap < best_gap) {
      best_gap = gap;
      best = trial.dispersion;
    }
    if (gap <= tolerance) break;
    (h < target_mean_h_star ? lo : hi) = trial.dispersion;
  }
  return best;
}

namespace {

std::string_view model_name(DegreeModel m) {
  switch (m) {
    case DegreeModel::PowerLaw: return "powerlaw";
    case DegreeModel::Poisson: return "poisson";
    case DegreeModel::Regular: return "regular";
  }
  return "powerlaw";
}

DegreeModel parse_model(const std::string& name) {
  if (name == "powerlaw") return DegreeModel::PowerLaw;
  if (name == "poisson") return DegreeModel::Poisson;
  if (name == "regular") return DegreeModel::Regular;
  throw std::invalid_argument("unknown degree model '" + name + "'");
}

}  // namespace

SynthConfig synth_config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("synth config: ") + e.what());
  }
  SynthConfig cfg;
  try {
    cfg.vertex_count = j.value("vertex_count", cfg.vertex_count);
    cfg.degrees.model = parse_model(j.value("degree_model", std::string(model_name(cfg.degrees.model))));
    cfg.degrees.parameter = j.value("degree_parameter", cfg.degrees.parameter);
    cfg.degrees.min_degree = j.value("min_degree", cfg.degrees.min_degree);
    cfg.degrees.max_degree = j.value("max_degree", cfg.degrees.max_degree);
    cfg.target_assortativity = j.value("target_assortativity", cfg.target_assortativity);
    cfg.dispersion = j.value("dispersion", cfg.dispersion);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.assortativity_tolerance = j.value("assortativity_tolerance", cfg.assortativity_tolerance);
    cfg.tuning_multiplier = j.value("tuning_multiplier", cfg.tuning_multiplier);
    cfg.median_calls_per_neighbor = j.value("median_calls_per_neighbor", cfg.median_calls_per_neighbor);
    cfg.propensity_sigma = j.value("propensity_sigma", cfg.propensity_sigma);
  } catch (const nlohmann::json::type_error& e) {
    throw std::invalid_argument(std::string("synth config: ") + e.what());
  }
  return cfg;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
  nlohmann::json j;
  j["vertex_count"] = cfg.vertex_count;
  j["degree_model"] = model_name(cfg.degrees.model);
  j["degree_parameter"] = cfg.degrees.parameter;
  j["min_degree"] = cfg.degrees.min_degree;
  j["max_degree"] = cfg.degrees.max_degree;
  j["target_assortativity"] = cfg.target_assortativity;
  j["dispersion"] = cfg.dispersion;
  j["seed"] = cfg.seed;
  j["assortativity_tolerance"] = cfg.assortativity_tolerance;
  j["tuning_multiplier"] = cfg.tuning_multiplier;
  j["median_calls_per_neighbor"] = cfg.median_calls_per_neighbor;
  j["propensity_sigma"] = cfg.propensity_sigma;
  return j.dump(2);
}

}  // namespace dyadrec
