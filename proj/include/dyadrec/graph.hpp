/*
  WeightedDigraph: immutable directed graph with positive arc weights.

  Arcs are stored in CSR form keyed by source, with targets sorted inside
  each row, so arc lookup is a binary search and every traversal has a
  fixed order. Out-strength and out-degree are cached at finalization.
  Once built a graph is never mutated, so concurrent readers are safe.
*/
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dyadrec {

using VertexId = std::uint32_t;
using Weight = double;

struct Arc {
  VertexId source = 0;
  VertexId target = 0;
  Weight weight = 0.0;

  bool operator==(const Arc&) const = default;
};

// Unordered pair with arcs in both directions, oriented so that a < b.
struct MutualDyad {
  VertexId a = 0;
  VertexId b = 0;
  Weight w_ab = 0.0;
  Weight w_ba = 0.0;

  bool operator==(const MutualDyad&) const = default;
};

// UMAN counts. asymmetric + 2 * mutual == total_arcs and
// mutual + asymmetric + null_dyads == V * (V - 1) / 2.
struct DyadCensus {
  std::uint64_t mutual = 0;
  std::uint64_t asymmetric = 0;
  std::uint64_t null_dyads = 0;
  std::uint64_t total_arcs = 0;

  bool operator==(const DyadCensus&) const = default;
};

class WeightedDigraph {
 public:
  WeightedDigraph() = default;

  std::size_t vertex_count() const { return strengths_.size(); }
  std::size_t arc_count() const { return targets_.size(); }

  std::size_t out_degree(VertexId v) const;
  Weight out_strength(VertexId v) const;
  std::span<const VertexId> out_neighbors(VertexId v) const;
  std::span<const Weight> out_weights(VertexId v) const;

  std::optional<Weight> weight(VertexId source, VertexId target) const;
  bool has_arc(VertexId source, VertexId target) const {
    return weight(source, target).has_value();
  }

  // All arcs in (source, target) order.
  std::vector<Arc> arcs() const;

  // External id of each vertex, or empty when ids are the dense indices.
  const std::vector<std::string>& external_ids() const { return external_ids_; }
  std::string external_id(VertexId v) const;

  // Same vertex count, arcs, weights (bitwise) and id map.
  bool operator==(const WeightedDigraph&) const = default;

 private:
  friend class GraphBuilder;

  void check_vertex(VertexId v) const;

  std::vector<std::size_t> offsets_{0};
  std::vector<VertexId> targets_;
  std::vector<Weight> weights_;
  std::vector<Weight> strengths_;
  std::vector<std::string> external_ids_;
};

struct BuildStats {
  std::uint64_t self_loops_dropped = 0;
  std::uint64_t duplicate_arcs_merged = 0;
};

/*
  Single-writer accumulator for a WeightedDigraph. Self-loops are dropped
  and counted; repeated (source, target) pairs are merged by summing their
  weights. Duplicate weights are summed in sorted order so the result does
  not depend on insertion order.
*/
class GraphBuilder {
 public:
  explicit GraphBuilder(std::size_t vertex_count);

  // Throws std::out_of_range for ids >= vertex_count and
  // std::invalid_argument for weights that are not finite and positive.
  void add_arc(VertexId source, VertexId target, Weight weight);
  void add_arc(const Arc& arc) { add_arc(arc.source, arc.target, arc.weight); }

  // Must hold exactly vertex_count entries (or be empty).
  void set_external_ids(std::vector<std::string> ids);

  std::size_t vertex_count() const { return vertex_count_; }
  const BuildStats& stats() const { return stats_; }

  WeightedDigraph finalize();

 private:
  std::size_t vertex_count_;
  std::vector<Arc> pending_;
  std::vector<std::string> external_ids_;
  BuildStats stats_;
};

WeightedDigraph make_graph(std::size_t vertex_count, std::span<const Arc> arcs);

// Copy of g with every arc weight replaced, arcs visited in arcs() order.
WeightedDigraph with_weights(const WeightedDigraph& g, std::span<const Weight> weights);

// Sum of weights leaving v. Throws std::domain_error for an invalid id.
Weight out_strength(const WeightedDigraph& g, VertexId v);

// w_ij / w_i+. Throws std::domain_error when the arc i -> j is absent.
double normalized_weight(const WeightedDigraph& g, VertexId i, VertexId j);

DyadCensus dyad_census(const WeightedDigraph& g);

// Every mutual dyad exactly once, sorted by (a, b).
std::vector<MutualDyad> mutual_dyads(const WeightedDigraph& g);

template <typename Fn>
void for_each_mutual_dyad(const WeightedDigraph& g, Fn&& fn) {
  const auto n = static_cast<VertexId>(g.vertex_count());
  for (VertexId a = 0; a < n; ++a) {
    const auto targets = g.out_neighbors(a);
    const auto weights = g.out_weights(a);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const VertexId b = targets[i];
      if (b <= a) continue;
      if (auto back = g.weight(b, a)) fn(MutualDyad{a, b, weights[i], *back});
    }
  }
}

// Number of mutual partners of each vertex.
std::vector<std::size_t> mutual_degrees(const WeightedDigraph& g);

}  // namespace dyadrec
