#include "dyadrec/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dyadrec {

void WeightedDigraph::check_vertex(VertexId v) const {
  if (v >= vertex_count()) {
    throw std::domain_error("vertex id " + std::to_string(v) + " out of range (V=" +
                            std::to_string(vertex_count()) + ")");
  }
}

std::size_t WeightedDigraph::out_degree(VertexId v) const {
  check_vertex(v);
  return offsets_[v + 1] - offsets_[v];
}

Weight WeightedDigraph::out_strength(VertexId v) const {
  check_vertex(v);
  return strengths_[v];
}

std::span<const VertexId> WeightedDigraph::out_neighbors(VertexId v) const {
  check_vertex(v);
  return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::span<const Weight> WeightedDigraph::out_weights(VertexId v) const {
  check_vertex(v);
  return {weights_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::optional<Weight> WeightedDigraph::weight(VertexId source, VertexId target) const {
  check_vertex(source);
  check_vertex(target);
  const auto first = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[source]);
  const auto last = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[source + 1]);
  const auto it = std::lower_bound(first, last, target);
  if (it == last || *it != target) return std::nullopt;
  return weights_[static_cast<std::size_t>(it - targets_.begin())];
}

std::vector<Arc> WeightedDigraph::arcs() const {
  std::vector<Arc> out;
  out.reserve(arc_count());
  for (VertexId v = 0; v < vertex_count(); ++v) {
    for (std::size_t e = offsets_[v]; e < offsets_[v + 1]; ++e) {
      out.push_back({v, targets_[e], weights_[e]});
    }
  }
  return out;
}

std::string WeightedDigraph::external_id(VertexId v) const {
  check_vertex(v);
  return external_ids_.empty() ? std::to_string(v) : external_ids_[v];
}

GraphBuilder::GraphBuilder(std::size_t vertex_count) : vertex_count_(vertex_count) {
  if (vertex_count > static_cast<std::size_t>(UINT32_MAX)) {
    throw std::invalid_argument("vertex count exceeds 32-bit id space");
  }
}

void GraphBuilder::add_arc(VertexId source, VertexId target, Weight weight) {
  if (source >= vertex_count_ || target >= vertex_count_) {
    throw std::out_of_range("arc endpoint out of range");
  }
  if (!std::isfinite(weight) || weight <= 0.0) {
    throw std::invalid_argument("arc weight must be finite and positive");
  }
  if (source == target) {
    ++stats_.self_loops_dropped;
    return;
  }
  pending_.push_back({source, target, weight});
}

void GraphBuilder::set_external_ids(std::vector<std::string> ids) {
  if (!ids.empty() && ids.size() != vertex_count_) {
    throw std::invalid_argument("external id map size does not match vertex count");
  }
  external_ids_ = std::move(ids);
}

WeightedDigraph GraphBuilder::finalize() {
  std::sort(pending_.begin(), pending_.end(), [](const Arc& x, const Arc& y) {
    if (x.source != y.source) return x.source < y.source;
    if (x.target != y.target) return x.target < y.target;
    return x.weight < y.weight;
  });

  WeightedDigraph g;
  g.offsets_.assign(vertex_count_ + 1, 0);
  g.strengths_.assign(vertex_count_, 0.0);
  g.targets_.reserve(pending_.size());
  g.weights_.reserve(pending_.size());

  for (std::size_t i = 0; i < pending_.size();) {
    const Arc& head = pending_[i];
    Weight total = head.weight;
    std::size_t j = i + 1;
    for (; j < pending_.size() && pending_[j].source == head.source &&
           pending_[j].target == head.target;
         ++j) {
      total += pending_[j].weight;
      ++stats_.duplicate_arcs_merged;
    }
    g.targets_.push_back(head.target);
    g.weights_.push_back(total);
    ++g.offsets_[head.source + 1];
    i = j;
  }
  for (std::size_t v = 0; v < vertex_count_; ++v) g.offsets_[v + 1] += g.offsets_[v];
  for (std::size_t v = 0; v < vertex_count_; ++v) {
    Weight s = 0.0;
    for (std::size_t e = g.offsets_[v]; e < g.offsets_[v + 1]; ++e) s += g.weights_[e];
    g.strengths_[v] = s;
  }
  // An id map that spells out the dense indices is stored as no map, so
  // equal graphs compare equal however they were loaded.
  bool identity = true;
  for (std::size_t v = 0; v < external_ids_.size() && identity; ++v) {
    identity = external_ids_[v] == std::to_string(v);
  }
  if (!identity) g.external_ids_ = std::move(external_ids_);

  pending_.clear();
  external_ids_.clear();
  return g;
}

WeightedDigraph make_graph(std::size_t vertex_count, std::span<const Arc> arcs) {
  GraphBuilder builder(vertex_count);
  for (const Arc& arc : arcs) builder.add_arc(arc);
  return builder.finalize();
}

WeightedDigraph with_weights(const WeightedDigraph& g, std::span<const Weight> weights) {
  if (weights.size() != g.arc_count()) {
    throw std::invalid_argument("weight vector length does not match arc count");
  }
  GraphBuilder builder(g.vertex_count());
  std::size_t e = 0;
  for (const Arc& arc : g.arcs()) builder.add_arc(arc.source, arc.target, weights[e++]);
  builder.set_external_ids(g.external_ids());
  return builder.finalize();
}

Weight out_strength(const WeightedDigraph& g, VertexId v) { return g.out_strength(v); }

double normalized_weight(const WeightedDigraph& g, VertexId i, VertexId j) {
  const auto w = g.weight(i, j);
  if (!w) {
    throw std::domain_error("no arc " + std::to_string(i) + " -> " + std::to_string(j));
  }
  return *w / g.out_strength(i);
}

DyadCensus dyad_census(const WeightedDigraph& g) {
  DyadCensus census;
  census.total_arcs = g.arc_count();
  for_each_mutual_dyad(g, [&](const MutualDyad&) { ++census.mutual; });
  census.asymmetric = census.total_arcs - 2 * census.mutual;
  const std::uint64_t v = g.vertex_count();
  const std::uint64_t pairs = v < 2 ? 0 : v * (v - 1) / 2;
  census.null_dyads = pairs - census.mutual - census.asymmetric;
  return census;
}

std::vector<MutualDyad> mutual_dyads(const WeightedDigraph& g) {
  std::vector<MutualDyad> out;
  for_each_mutual_dyad(g, [&](const MutualDyad& d) { out.push_back(d); });
  return out;
}

std::vector<std::size_t> mutual_degrees(const WeightedDigraph& g) {
  std::vector<std::size_t> degree(g.vertex_count(), 0);
  for_each_mutual_dyad(g, [&](const MutualDyad& d) {
    ++degree[d.a];
    ++degree[d.b];
  });
  return degree;
}

}  // namespace dyadrec
