/*
  Counterfactual networks for the 2x2 comparison of degree mixing
  (observed / rewired) against weight dispersion (observed / equalized).

  Rewiring acts on the undirected backbone of mutual dyads. Swapping
  directed arcs independently would break mutuality and empty the set of
  dyads on which reciprocity is defined. One-way arcs are carried over
  unchanged and block any swap that would land on their vertex pair.
*/
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dyadrec/graph.hpp"
#include "dyadrec/metrics.hpp"
#include "dyadrec/random.hpp"

namespace dyadrec {

/*
  Simple undirected graph with a fixed degree sequence, mutated only by
  degree-preserving double-edge swaps. The excess-degree cross moment is
  tracked so assortativity is available in O(1) after every swap.
*/
class Backbone {
 public:
  // `blocked` pairs may not become edges (e.g. vertex pairs joined by a
  // one-way arc). Throws std::invalid_argument on self-loops or repeats.
  Backbone(std::size_t vertex_count, std::vector<UndirectedEdge> edges,
           std::span<const UndirectedEdge> blocked = {});

  // Mutual dyads of g; with block_one_way, one-way arc pairs are blocked.
  static Backbone from_mutual(const WeightedDigraph& g, bool block_one_way = true);

  std::size_t vertex_count() const { return degrees_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const UndirectedEdge> edges() const { return edges_; }
  const std::vector<std::size_t>& degrees() const { return degrees_; }
  bool has_edge(VertexId u, VertexId v) const;

  // Edges i = (a, b) and j = (c, d) become (a, d), (c, b); with `cross`
  // the pairing is (a, c), (b, d) instead.
  bool can_swap(std::size_t i, std::size_t j, bool cross) const;
  // Change in the sum of x_u * x_v over edges if the swap were applied.
  std::int64_t swap_delta(std::size_t i, std::size_t j, bool cross) const;
  void apply_swap(std::size_t i, std::size_t j, bool cross);

  // Excess-degree assortativity of the current edges; nullopt when the
  // correlation is undefined (zero variance or fewer than two edges).
  std::optional<double> assortativity() const;
  std::optional<double> assortativity_after(std::int64_t delta) const;

 private:
  static std::uint64_t key(VertexId u, VertexId v);
  std::pair<UndirectedEdge, UndirectedEdge> swapped(std::size_t i, std::size_t j, bool cross) const;
  std::int64_t excess(VertexId v) const { return static_cast<std::int64_t>(degrees_[v]) - 1; }

  std::vector<UndirectedEdge> edges_;
  std::vector<std::size_t> degrees_;
  std::unordered_set<std::uint64_t> occupied_;
  std::unordered_set<std::uint64_t> blocked_;
  __int128 s1_ = 0, s2_ = 0;
  __int128 cross_ = 0;
};

struct RegimeConfig {
  bool destroy_assortativity = false;
  bool impose_equidispersion = false;
  std::uint64_t seed = 1;
  // Attempted swaps = swap_multiplier * backbone edge count.
  unsigned swap_multiplier = 10;
  // Keep one-way arcs (they still count toward out-strength).
  bool keep_one_way_arcs = true;
  // Stop once |r| falls below this, checked every edge_count / 10 attempts.
  // Zero disables early stopping.
  double early_stop_abs_r = 0.005;
};

struct RewireOutcome {
  WeightedDigraph graph;
  std::uint64_t attempted_swaps = 0;
  std::uint64_t accepted_swaps = 0;
  std::optional<double> residual_assortativity;
  // Set when no swap was ever accepted (e.g. a complete backbone).
  bool stalled = false;
};

// Degree-preserving randomization of the mutual backbone followed by
// reattach_weights. Throws std::domain_error with fewer than two mutual dyads.
RewireOutcome maslov_sneppen_rewire(const WeightedDigraph& g, const RegimeConfig& cfg, Rng& rng);

// Backbone after rewiring, as a graph with unit weights on mutual arcs and
// original weights on kept one-way arcs. Used by maslov_sneppen_rewire.
WeightedDigraph backbone_graph(const WeightedDigraph& original, const Backbone& backbone,
                               bool keep_one_way_arcs);

// Every arc i -> j gets weight w_i+ / k_i^out. Vertices whose out-weights
// are already equal are left bit-identical, making the transform idempotent.
WeightedDigraph equidisperse(const WeightedDigraph& g);

// Gives each vertex's new mutual arcs a seeded random permutation of its
// original mutual out-weights. Arcs that are not mutual in `rewired` keep
// their weights. Throws IntegrityError when mutual degrees differ.
WeightedDigraph reattach_weights(const WeightedDigraph& rewired, const WeightedDigraph& original,
                                 Rng& rng);

enum class Regime : std::uint8_t {
  Observed = 0,                // assortative, observed dispersion
  ObservedEquidispersed = 1,   // assortative, equalized weights
  Rewired = 2,                 // neutral mixing, observed dispersion
  RewiredEquidispersed = 3,    // neutral mixing, equalized weights
};

inline constexpr std::array<Regime, 4> kAllRegimes{
    Regime::Observed, Regime::ObservedEquidispersed, Regime::Rewired,
    Regime::RewiredEquidispersed};

std::string_view to_string(Regime r);

struct FourRegimes {
  std::array<WeightedDigraph, 4> graphs;  // indexed by Regime
  std::uint64_t seed = 0;
  std::uint64_t attempted_swaps = 0;
  std::uint64_t accepted_swaps = 0;
  std::optional<double> residual_assortativity;
  bool stalled = false;

  const WeightedDigraph& operator[](Regime r) const { return graphs[static_cast<std::size_t>(r)]; }
};

// Both rewired cells share one backbone drawn from `seed`.
FourRegimes four_regimes(const WeightedDigraph& g, std::uint64_t seed, unsigned swap_multiplier,
                         bool keep_one_way_arcs = true);

// One cell of the 2x2 table.
WeightedDigraph apply_regime(const WeightedDigraph& g, const RegimeConfig& cfg);

}  // namespace dyadrec
