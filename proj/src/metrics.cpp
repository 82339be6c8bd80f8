#include "dyadrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

#include "dyadrec/errors.hpp"

namespace dyadrec {

std::string_view to_string(DyadClass c) {
  switch (c) {
    case DyadClass::Reciprocal: return "reciprocal";
    case DyadClass::PartiallyReciprocal: return "partially_reciprocal";
    case DyadClass::NonReciprocal: return "non_reciprocal";
  }
  return "unknown";
}

ReciprocityRecord reciprocity(const WeightedDigraph& g, VertexId a, VertexId b) {
  if (a > b) std::swap(a, b);
  const auto w_ab = g.weight(a, b);
  const auto w_ba = g.weight(b, a);
  if (!w_ab || !w_ba) {
    throw std::domain_error("reciprocity undefined for non-mutual pair (" + std::to_string(a) +
                            ", " + std::to_string(b) + ")");
  }
  return reciprocity(g, MutualDyad{a, b, *w_ab, *w_ba});
}

ReciprocityRecord reciprocity(const WeightedDigraph& g, const MutualDyad& d) {
  ReciprocityRecord rec;
  rec.dyad = d;
  rec.p_ab = d.w_ab / g.out_strength(d.a);
  rec.p_ba = d.w_ba / g.out_strength(d.b);
  rec.r_value = std::fabs(std::log(rec.p_ab) - std::log(rec.p_ba));
  rec.dyad_class = classify(rec.r_value);
  return rec;
}

double reciprocity_from_weights(double w_ab, double w_ba, double s_a, double s_b) {
  return std::fabs(std::log((w_ab / w_ba) * (s_b / s_a)));
}

DyadClass classify(double r_value) {
  if (!std::isfinite(r_value) || r_value < 0.0) {
    throw std::domain_error("reciprocity value must be finite and non-negative");
  }
  if (r_value <= kReciprocalMaxR) return DyadClass::Reciprocal;
  if (r_value <= kPartiallyReciprocalMaxR) return DyadClass::PartiallyReciprocal;
  return DyadClass::NonReciprocal;
}

double equidispersion_prediction(std::size_t k_a, std::size_t k_b) {
  if (k_a == 0 || k_b == 0) throw std::domain_error("out-degree must be at least 1");
  return std::fabs(std::log(static_cast<double>(k_b)) - std::log(static_cast<double>(k_a)));
}

std::vector<ReciprocityRecord> reciprocity_records(const WeightedDigraph& g, unsigned threads) {
  const std::vector<MutualDyad> dyads = mutual_dyads(g);
  std::vector<ReciprocityRecord> records(dyads.size());
  const auto compute = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) records[i] = reciprocity(g, dyads[i]);
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, dyads.size() / 4096));
  if (workers <= 1) {
    compute(0, dyads.size());
    return records;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (dyads.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(dyads.size(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(compute, begin, end);
  }
  for (auto& t : pool) t.join();
  return records;
}

ConcentrationScore concentration_of(std::span<const double> weights) {
  const std::size_t k = weights.size();
  if (k < 2) throw std::domain_error("concentration requires out-degree >= 2");
  double strength = 0.0;
  for (double w : weights) strength += w;
  double h = 0.0;
  for (double w : weights) {
    const double p = w / strength;
    h += p * p;
  }
  const double floor = 1.0 / static_cast<double>(k);
  ConcentrationScore score;
  score.out_degree = k;
  score.h = h;
  score.h_star = (h - floor) / (1.0 - floor);
  return score;
}

ConcentrationScore concentration(const WeightedDigraph& g, VertexId v) {
  if (g.out_degree(v) < 2) {
    throw std::domain_error("concentration requires out-degree >= 2 (vertex " +
                            std::to_string(v) + ")");
  }
  ConcentrationScore score = concentration_of(g.out_weights(v));
  score.vertex = v;
  return score;
}

std::vector<ConcentrationScore> concentration_scores(const WeightedDigraph& g) {
  std::vector<ConcentrationScore> out;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (g.out_degree(v) >= 2) out.push_back(concentration(g, v));
  }
  return out;
}

AssortativityResult edge_assortativity(std::span<const UndirectedEdge> edges,
                                       std::span<const std::size_t> degrees) {
  if (edges.size() < 2) {
    throw std::domain_error("assortativity needs at least two edges");
  }
  // Exact integer moments over the 2E ordered endpoint pairs.
  __int128 s1 = 0, s2 = 0, cross = 0;
  for (const auto& e : edges) {
    const auto xu = static_cast<__int128>(degrees[e.u]) - 1;
    const auto xv = static_cast<__int128>(degrees[e.v]) - 1;
    s1 += xu + xv;
    s2 += xu * xu + xv * xv;
    cross += 2 * xu * xv;
  }
  const auto n = static_cast<__int128>(2 * edges.size());
  const __int128 num = n * cross - s1 * s1;
  const __int128 den = n * s2 - s1 * s1;
  if (den == 0) throw UndefinedCorrelation("endpoint degrees have zero variance");
  return {static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den)),
          2 * edges.size()};
}

AssortativityResult degree_assortativity(const WeightedDigraph& g, AssortativityScope scope) {
  std::vector<UndirectedEdge> edges;
  if (scope == AssortativityScope::MutualBackbone) {
    for_each_mutual_dyad(g, [&](const MutualDyad& d) { edges.push_back({d.a, d.b}); });
  } else {
    edges.reserve(g.arc_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      for (VertexId t : g.out_neighbors(v)) {
        // Each unordered pair once: keep a -> b with a < b, or b -> a when a -> b is absent.
        if (v < t || !g.has_arc(t, v)) edges.push_back({std::min(v, t), std::max(v, t)});
      }
    }
  }
  std::vector<std::size_t> degree(g.vertex_count(), 0);
  for (const auto& e : edges) {
    ++degree[e.u];
    ++degree[e.v];
  }
  return edge_assortativity(edges, degree);
}

std::array<double, 3> ReciprocityHistogram::class_proportions() const {
  std::array<double, 3> out{};
  if (total == 0) return out;
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = static_cast<double>(class_counts[i]) / static_cast<double>(total);
  }
  return out;
}

ReciprocityHistogram reciprocity_distribution(std::span<const ReciprocityRecord> records,
                                              double bin_width) {
  if (!std::isfinite(bin_width) || bin_width <= 0.0) {
    throw std::domain_error("bin width must be finite and positive");
  }
  ReciprocityHistogram hist;
  hist.bin_width = bin_width;
  for (const auto& rec : records) {
    const auto bin = static_cast<std::size_t>(std::floor(rec.r_value / bin_width));
    if (bin >= hist.counts.size()) hist.counts.resize(bin + 1, 0);
    ++hist.counts[bin];
    ++hist.class_counts[static_cast<std::size_t>(classify(rec.r_value))];
    ++hist.total;
  }
  return hist;
}

}  // namespace dyadrec
