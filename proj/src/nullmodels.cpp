#include "dyadrec/nullmodels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dyadrec/errors.hpp"

namespace dyadrec {

std::uint64_t Backbone::key(VertexId u, VertexId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

Backbone::Backbone(std::size_t vertex_count, std::vector<UndirectedEdge> edges,
                   std::span<const UndirectedEdge> blocked)
    : edges_(std::move(edges)), degrees_(vertex_count, 0) {
  occupied_.reserve(edges_.size() * 2);
  for (const auto& e : edges_) {
    if (e.u >= vertex_count || e.v >= vertex_count) {
      throw std::out_of_range("backbone edge endpoint out of range");
    }
    if (e.u == e.v) throw std::invalid_argument("backbone edge is a self-loop");
    if (!occupied_.insert(key(e.u, e.v)).second) {
      throw std::invalid_argument("backbone edge repeated");
    }
    ++degrees_[e.u];
    ++degrees_[e.v];
  }
  for (const auto& e : blocked) blocked_.insert(key(e.u, e.v));
  for (const auto& e : edges_) {
    const __int128 xu = excess(e.u), xv = excess(e.v);
    s1_ += xu + xv;
    s2_ += xu * xu + xv * xv;
    cross_ += excess(e.u) * excess(e.v);
  }
}

Backbone Backbone::from_mutual(const WeightedDigraph& g, bool block_one_way) {
  std::vector<UndirectedEdge> edges;
  for_each_mutual_dyad(g, [&](const MutualDyad& d) { edges.push_back({d.a, d.b}); });
  std::vector<UndirectedEdge> blocked;
  if (block_one_way) {
    for (const Arc& arc : g.arcs()) {
      if (!g.has_arc(arc.target, arc.source)) blocked.push_back({arc.source, arc.target});
    }
  }
  return Backbone(g.vertex_count(), std::move(edges), blocked);
}

bool Backbone::has_edge(VertexId u, VertexId v) const { return occupied_.contains(key(u, v)); }

std::pair<UndirectedEdge, UndirectedEdge> Backbone::swapped(std::size_t i, std::size_t j,
                                                            bool cross) const {
  const auto [a, b] = edges_[i];
  const auto [c, d] = edges_[j];
  if (cross) return {UndirectedEdge{a, c}, UndirectedEdge{b, d}};
  return {UndirectedEdge{a, d}, UndirectedEdge{c, b}};
}

bool Backbone::can_swap(std::size_t i, std::size_t j, bool cross) const {
  if (i == j) return false;
  const auto [e1, e2] = swapped(i, j, cross);
  if (e1.u == e1.v || e2.u == e2.v) return false;
  const auto k1 = key(e1.u, e1.v), k2 = key(e2.u, e2.v);
  if (k1 == k2) return false;
  if (occupied_.contains(k1) || occupied_.contains(k2)) return false;
  if (blocked_.contains(k1) || blocked_.contains(k2)) return false;
  return true;
}

std::int64_t Backbone::swap_delta(std::size_t i, std::size_t j, bool cross) const {
  const auto [e1, e2] = swapped(i, j, cross);
  const auto& o1 = edges_[i];
  const auto& o2 = edges_[j];
  return excess(e1.u) * excess(e1.v) + excess(e2.u) * excess(e2.v) -
         excess(o1.u) * excess(o1.v) - excess(o2.u) * excess(o2.v);
}

void Backbone::apply_swap(std::size_t i, std::size_t j, bool cross) {
  if (!can_swap(i, j, cross)) throw std::logic_error("swap not permitted");
  const std::int64_t delta = swap_delta(i, j, cross);
  const auto [e1, e2] = swapped(i, j, cross);
  occupied_.erase(key(edges_[i].u, edges_[i].v));
  occupied_.erase(key(edges_[j].u, edges_[j].v));
  occupied_.insert(key(e1.u, e1.v));
  occupied_.insert(key(e2.u, e2.v));
  edges_[i] = e1;
  edges_[j] = e2;
  cross_ += delta;
}

std::optional<double> Backbone::assortativity_after(std::int64_t delta) const {
  if (edges_.size() < 2) return std::nullopt;
  const auto n = static_cast<__int128>(2 * edges_.size());
  const __int128 num = n * 2 * (cross_ + delta) - s1_ * s1_;
  const __int128 den = n * s2_ - s1_ * s1_;
  if (den == 0) return std::nullopt;
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

std::optional<double> Backbone::assortativity() const { return assortativity_after(0); }

WeightedDigraph backbone_graph(const WeightedDigraph& original, const Backbone& backbone,
                               bool keep_one_way_arcs) {
  if (backbone.vertex_count() != original.vertex_count()) {
    throw IntegrityError("backbone vertex count differs from original graph");
  }
  GraphBuilder builder(original.vertex_count());
  for (const auto& e : backbone.edges()) {
    builder.add_arc(e.u, e.v, 1.0);
    builder.add_arc(e.v, e.u, 1.0);
  }
  if (keep_one_way_arcs) {
    for (const Arc& arc : original.arcs()) {
      if (!original.has_arc(arc.target, arc.source)) builder.add_arc(arc);
    }
  }
  builder.set_external_ids(original.external_ids());
  return builder.finalize();
}

RewireOutcome maslov_sneppen_rewire(const WeightedDigraph& g, const RegimeConfig& cfg, Rng& rng) {
  Backbone backbone = Backbone::from_mutual(g, cfg.keep_one_way_arcs);
  const std::size_t m = backbone.edge_count();
  if (m < 2) throw std::domain_error("rewiring needs at least two mutual dyads");

  RewireOutcome out;
  const std::uint64_t budget = static_cast<std::uint64_t>(cfg.swap_multiplier) * m;
  const std::uint64_t check_every = std::max<std::uint64_t>(1, m / 10);
  for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
    const auto i = static_cast<std::size_t>(rng.below(m));
    const auto j = static_cast<std::size_t>(rng.below(m));
    const bool cross = rng.below(2) == 1;
    out.attempted_swaps = attempt;
    if (backbone.can_swap(i, j, cross)) {
      backbone.apply_swap(i, j, cross);
      ++out.accepted_swaps;
    }
    if (cfg.early_stop_abs_r > 0.0 && attempt % check_every == 0 && out.accepted_swaps > 0) {
      const auto r = backbone.assortativity();
      if (r && std::fabs(*r) < cfg.early_stop_abs_r) break;
    }
  }
  out.stalled = out.accepted_swaps == 0;
  out.residual_assortativity = backbone.assortativity();

  const WeightedDigraph topology = backbone_graph(g, backbone, cfg.keep_one_way_arcs);
  out.graph = reattach_weights(topology, g, rng);
  return out;
}

WeightedDigraph equidisperse(const WeightedDigraph& g) {
  std::vector<Weight> weights;
  weights.reserve(g.arc_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const auto ws = g.out_weights(v);
    if (ws.empty()) continue;
    const bool already_equal = std::all_of(ws.begin(), ws.end(), [&](Weight w) { return w == ws[0]; });
    const Weight share = already_equal ? ws[0] : g.out_strength(v) / static_cast<double>(ws.size());
    weights.insert(weights.end(), ws.size(), share);
  }
  return with_weights(g, weights);
}

namespace {

// Weights of arcs v -> t where t -> v also exists, in target order.
std::vector<std::vector<Weight>> mutual_out_weights(const WeightedDigraph& g) {
  std::vector<std::vector<Weight>> out(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const auto targets = g.out_neighbors(v);
    const auto ws = g.out_weights(v);
    for (std::size_t e = 0; e < targets.size(); ++e) {
      if (g.has_arc(targets[e], v)) out[v].push_back(ws[e]);
    }
  }
  return out;
}

}  // namespace

WeightedDigraph reattach_weights(const WeightedDigraph& rewired, const WeightedDigraph& original,
                                 Rng& rng) {
  if (rewired.vertex_count() != original.vertex_count()) {
    throw IntegrityError("rewired graph has a different vertex count");
  }
  auto pools = mutual_out_weights(original);
  std::vector<Weight> weights;
  weights.reserve(rewired.arc_count());
  for (VertexId v = 0; v < rewired.vertex_count(); ++v) {
    const auto targets = rewired.out_neighbors(v);
    const auto ws = rewired.out_weights(v);
    std::size_t mutual = 0;
    for (VertexId t : targets) mutual += rewired.has_arc(t, v) ? 1 : 0;
    auto& pool = pools[v];
    if (mutual != pool.size()) {
      throw IntegrityError("mutual degree of vertex " + std::to_string(v) + " changed from " +
                           std::to_string(pool.size()) + " to " + std::to_string(mutual));
    }
    rng.shuffle(std::span<Weight>(pool));
    std::size_t next = 0;
    for (std::size_t e = 0; e < targets.size(); ++e) {
      weights.push_back(rewired.has_arc(targets[e], v) ? pool[next++] : ws[e]);
    }
  }
  return with_weights(rewired, weights);
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Observed: return "observed";
    case Regime::ObservedEquidispersed: return "observed_equidispersed";
    case Regime::Rewired: return "rewired";
    case Regime::RewiredEquidispersed: return "rewired_equidispersed";
  }
  return "unknown";
}

namespace {

WeightedDigraph mutual_subgraph(const WeightedDigraph& g) {
  GraphBuilder builder(g.vertex_count());
  for_each_mutual_dyad(g, [&](const MutualDyad& d) {
    builder.add_arc(d.a, d.b, d.w_ab);
    builder.add_arc(d.b, d.a, d.w_ba);
  });
  builder.set_external_ids(g.external_ids());
  return builder.finalize();
}

}  // namespace

FourRegimes four_regimes(const WeightedDigraph& g, std::uint64_t seed, unsigned swap_multiplier,
                         bool keep_one_way_arcs) {
  const WeightedDigraph base = keep_one_way_arcs ? g : mutual_subgraph(g);
  RegimeConfig cfg;
  cfg.destroy_assortativity = true;
  cfg.seed = seed;
  cfg.swap_multiplier = swap_multiplier;
  cfg.keep_one_way_arcs = keep_one_way_arcs;
  Rng rng(seed);
  RewireOutcome rewired = maslov_sneppen_rewire(base, cfg, rng);

  FourRegimes out;
  out.seed = seed;
  out.attempted_swaps = rewired.attempted_swaps;
  out.accepted_swaps = rewired.accepted_swaps;
  out.residual_assortativity = rewired.residual_assortativity;
  out.stalled = rewired.stalled;
  out.graphs[static_cast<std::size_t>(Regime::ObservedEquidispersed)] = equidisperse(base);
  out.graphs[static_cast<std::size_t>(Regime::RewiredEquidispersed)] = equidisperse(rewired.graph);
  out.graphs[static_cast<std::size_t>(Regime::Rewired)] = std::move(rewired.graph);
  out.graphs[static_cast<std::size_t>(Regime::Observed)] = base;
  return out;
}

WeightedDigraph apply_regime(const WeightedDigraph& g, const RegimeConfig& cfg) {
  WeightedDigraph out = cfg.keep_one_way_arcs ? g : mutual_subgraph(g);
  if (cfg.destroy_assortativity) {
    Rng rng(cfg.seed);
    out = maslov_sneppen_rewire(out, cfg, rng).graph;
  }
  if (cfg.impose_equidispersion) out = equidisperse(out);
  return out;
}

}  // namespace dyadrec
