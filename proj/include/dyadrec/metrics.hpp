/*
  Per-dyad and per-vertex measures on a WeightedDigraph.

  Reciprocity of a mutual dyad (a, b) is R = |ln p_ab - ln p_ba| in nats,
  where p_ij = w_ij / w_i+ and w_i+ sums every arc leaving i, mutual or
  not. R = 0 is perfect balance; larger values mean one side is more
  likely to initiate contact than the other.
*/
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dyadrec/graph.hpp"

namespace dyadrec {

enum class DyadClass : std::uint8_t { Reciprocal = 0, PartiallyReciprocal = 1, NonReciprocal = 2 };

std::string_view to_string(DyadClass c);

// Class boundaries in nats: probability ratios 1.5 and 9.0. A value equal
// to a boundary belongs to the more reciprocal class.
inline const double kReciprocalMaxR = std::log(1.5);
inline const double kPartiallyReciprocalMaxR = std::log(9.0);

struct ReciprocityRecord {
  MutualDyad dyad;
  double p_ab = 0.0;
  double p_ba = 0.0;
  double r_value = 0.0;
  DyadClass dyad_class = DyadClass::Reciprocal;
};

// Throws std::domain_error unless both a -> b and b -> a exist.
ReciprocityRecord reciprocity(const WeightedDigraph& g, VertexId a, VertexId b);
ReciprocityRecord reciprocity(const WeightedDigraph& g, const MutualDyad& d);

// |ln[(w_ab / w_ba) (s_b / s_a)]|, the single-logarithm form of R.
double reciprocity_from_weights(double w_ab, double w_ba, double s_a, double s_b);

// Throws std::domain_error for negative or non-finite input.
DyadClass classify(double r_value);

// R of a dyad whose endpoints split activity equally over k_a and k_b
// neighbors: |ln k_b - ln k_a|. Throws std::domain_error on a zero degree.
double equidispersion_prediction(std::size_t k_a, std::size_t k_b);

// R for every mutual dyad in (a, b) order. The dyad list is split into
// contiguous chunks across `threads` workers; output order and values do
// not depend on the thread count.
std::vector<ReciprocityRecord> reciprocity_records(const WeightedDigraph& g,
                                                   unsigned threads = 1);

struct ConcentrationScore {
  VertexId vertex = 0;
  std::size_t out_degree = 0;
  double h = 0.0;       // sum of squared normalized weights
  double h_star = 0.0;  // (h - 1/k) / (1 - 1/k)
};

// Requires out-degree >= 2, otherwise std::domain_error.
ConcentrationScore concentration(const WeightedDigraph& g, VertexId v);

// Herfindahl pair for a raw weight vector (normalized internally).
ConcentrationScore concentration_of(std::span<const double> weights);

// Scores for every vertex with out-degree >= 2, in vertex order.
std::vector<ConcentrationScore> concentration_scores(const WeightedDigraph& g);

enum class AssortativityScope {
  // Undirected backbone of mutual dyads; degree = number of mutual partners.
  MutualBackbone,
  // Undirected projection of every arc; degree = number of distinct partners.
  AllArcs,
};

struct AssortativityResult {
  double r = 0.0;
  std::size_t pair_count = 0;  // ordered endpoint pairs, two per edge
};

// Pearson correlation of excess degrees (degree - 1) across edge endpoints,
// each edge counted in both orientations. Throws std::domain_error when
// fewer than two edges exist and UndefinedCorrelation when the endpoint
// degrees have zero variance.
AssortativityResult degree_assortativity(
    const WeightedDigraph& g, AssortativityScope scope = AssortativityScope::MutualBackbone);

struct UndirectedEdge {
  VertexId u = 0;
  VertexId v = 0;
};

// Same correlation for an explicit simple undirected edge list whose
// endpoint degrees are given.
AssortativityResult edge_assortativity(std::span<const UndirectedEdge> edges,
                                       std::span<const std::size_t> degrees);

struct ReciprocityHistogram {
  double bin_width = 0.1;
  std::vector<std::uint64_t> counts;  // bin i covers [i*w, (i+1)*w)
  std::array<std::uint64_t, 3> class_counts{};
  std::uint64_t total = 0;

  double bin_low(std::size_t i) const { return static_cast<double>(i) * bin_width; }
  double bin_high(std::size_t i) const { return static_cast<double>(i + 1) * bin_width; }
  // All zero when total == 0.
  std::array<double, 3> class_proportions() const;
};

inline constexpr double kDefaultBinWidth = 0.1;

// Throws std::domain_error unless bin_width is finite and positive.
ReciprocityHistogram reciprocity_distribution(std::span<const ReciprocityRecord> records,
                                              double bin_width = kDefaultBinWidth);

}  // namespace dyadrec
