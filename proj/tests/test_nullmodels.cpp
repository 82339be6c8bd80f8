#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "dyadrec/errors.hpp"
#include "dyadrec/metrics.hpp"
#include "dyadrec/nullmodels.hpp"
#include "dyadrec/synth.hpp"
#include "support/oracles.hpp"

using namespace dyadrec;

namespace {

std::vector<double> sorted_weights(const WeightedDigraph& g, VertexId v) {
  auto w = g.out_weights(v);
  std::vector<double> out(w.begin(), w.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

WeightedDigraph assortative_graph(std::size_t n, std::uint64_t seed, double r = 0.35) {
  SynthConfig cfg;
  cfg.vertex_count = n;
  cfg.target_assortativity = r;
  cfg.dispersion = 0.5;
  cfg.seed = seed;
  return generate(cfg).graph;
}

}  // namespace

TEST(Backbone, ForcedSwapExample) {
  // {1-2, 3-4} with ids shifted to start at zero
  Backbone bb(4, {{0, 1}, {2, 3}});
  ASSERT_TRUE(bb.can_swap(0, 1, false));
  bb.apply_swap(0, 1, false);
  EXPECT_TRUE(bb.has_edge(0, 3));
  EXPECT_TRUE(bb.has_edge(2, 1));
  EXPECT_FALSE(bb.has_edge(0, 1));
  EXPECT_EQ(bb.degrees(), (std::vector<std::size_t>{1, 1, 1, 1}));
}

TEST(Backbone, RejectsSwapCreatingDuplicateEdge) {
  // path 0-1-2-3 plus 0-3: swapping 0-1 with 2-3 into (0,3),(2,1) duplicates both
  Backbone bb(4, {{0, 1}, {2, 3}, {0, 3}, {1, 2}});
  EXPECT_FALSE(bb.can_swap(0, 1, false));
  const auto before = std::vector<UndirectedEdge>(bb.edges().begin(), bb.edges().end());
  EXPECT_FALSE(bb.can_swap(0, 0, false));
  // graph unchanged
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(bb.edges()[i].u, before[i].u);
    EXPECT_EQ(bb.edges()[i].v, before[i].v);
  }
}

TEST(Backbone, RejectsSelfLoopSwapAndBlockedPairs) {
  Backbone bb(4, {{0, 1}, {0, 2}});
  // (0,1),(0,2) -> (0,2),(0,1) or (0,0),(1,2): both invalid
  EXPECT_FALSE(bb.can_swap(0, 1, false));
  EXPECT_FALSE(bb.can_swap(0, 1, true));
  const std::vector<UndirectedEdge> blocked{{0, 3}};
  Backbone b2(4, {{0, 1}, {2, 3}}, blocked);
  EXPECT_FALSE(b2.can_swap(0, 1, false));  // would create 0-3
  EXPECT_TRUE(b2.can_swap(0, 1, true));    // creates 0-2 and 1-3
  EXPECT_THROW(Backbone(3, {{0, 0}}), std::invalid_argument);
  EXPECT_THROW(Backbone(3, {{0, 1}, {1, 0}}), std::invalid_argument);
}

TEST(Backbone, IncrementalAssortativityMatchesRecompute) {
  std::mt19937_64 rng(41);
  const auto g = assortative_graph(500, 3);
  Backbone bb = Backbone::from_mutual(g);
  std::uniform_int_distribution<std::size_t> pick(0, bb.edge_count() - 1);
  for (int step = 0; step < 2000; ++step) {
    const std::size_t i = pick(rng), j = pick(rng);
    const bool cross = rng() & 1;
    if (!bb.can_swap(i, j, cross)) continue;
    const auto predicted = bb.assortativity_after(bb.swap_delta(i, j, cross));
    bb.apply_swap(i, j, cross);
    ASSERT_TRUE(predicted && bb.assortativity());
    EXPECT_NEAR(*predicted, *bb.assortativity(), 1e-12);
  }
  std::vector<std::size_t> degrees(bb.degrees().begin(), bb.degrees().end());
  const double direct = edge_assortativity(bb.edges(), degrees).r;
  EXPECT_NEAR(*bb.assortativity(), direct, 1e-12);
}

TEST(Rewire, DestroysAssortativityAndPreservesDegrees) {
  const auto g = assortative_graph(3000, 5, 0.4);
  const double before = degree_assortativity(g).r;
  ASSERT_GT(before, 0.3);
  RegimeConfig cfg;
  cfg.destroy_assortativity = true;
  Rng rng(17);
  const auto out = maslov_sneppen_rewire(g, cfg, rng);
  EXPECT_LT(std::fabs(degree_assortativity(out.graph).r), 0.02);
  ASSERT_TRUE(out.residual_assortativity);
  EXPECT_NEAR(*out.residual_assortativity, degree_assortativity(out.graph).r, 1e-12);
  EXPECT_EQ(sorted(mutual_degrees(out.graph)), sorted(mutual_degrees(g)));
  EXPECT_EQ(mutual_degrees(out.graph), mutual_degrees(g));
  EXPECT_LE(out.accepted_swaps, out.attempted_swaps);
  EXPECT_GT(out.accepted_swaps, 0u);
  EXPECT_FALSE(out.stalled);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    EXPECT_EQ(sorted_weights(out.graph, v), sorted_weights(g, v));
  }
}

TEST(Rewire, SameSeedIsBitReproducible) {
  const auto g = assortative_graph(800, 6);
  RegimeConfig cfg;
  cfg.destroy_assortativity = true;
  Rng a(99), b(99), c(100);
  const auto x = maslov_sneppen_rewire(g, cfg, a);
  const auto y = maslov_sneppen_rewire(g, cfg, b);
  const auto z = maslov_sneppen_rewire(g, cfg, c);
  EXPECT_EQ(x.graph, y.graph);
  EXPECT_EQ(x.accepted_swaps, y.accepted_swaps);
  EXPECT_FALSE(x.graph == z.graph);
}

TEST(Rewire, KeepsOneWayArcsUnlessAskedNotTo) {
  std::mt19937_64 rng(43);
  const auto g = oracle::random_graph(120, 0.06, rng, 10, 0.5);
  ASSERT_GT(dyad_census(g).asymmetric, 0u);
  RegimeConfig cfg;
  cfg.destroy_assortativity = true;
  cfg.early_stop_abs_r = 0.0;
  Rng r1(1);
  const auto kept = maslov_sneppen_rewire(g, cfg, r1).graph;
  EXPECT_EQ(dyad_census(kept).asymmetric, dyad_census(g).asymmetric);
  EXPECT_EQ(dyad_census(kept).mutual, dyad_census(g).mutual);
  for (const Arc& a : g.arcs()) {
    if (!g.has_arc(a.target, a.source)) EXPECT_EQ(kept.weight(a.source, a.target), a.weight);
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) EXPECT_EQ(kept.out_strength(v), g.out_strength(v));

  cfg.keep_one_way_arcs = false;
  Rng r2(1);
  const auto dropped = maslov_sneppen_rewire(g, cfg, r2).graph;
  EXPECT_EQ(dyad_census(dropped).asymmetric, 0u);
  EXPECT_EQ(dyad_census(dropped).mutual, dyad_census(g).mutual);
}

TEST(Rewire, TooFewEdgesAndStalls) {
  const std::vector<Arc> one{{0, 1, 1}, {1, 0, 1}};
  RegimeConfig cfg;
  cfg.destroy_assortativity = true;
  Rng rng(1);
  EXPECT_THROW(maslov_sneppen_rewire(make_graph(2, one), cfg, rng), std::domain_error);
  // complete graph K4: every swap would duplicate an edge
  std::vector<Arc> k4;
  for (VertexId i = 0; i < 4; ++i)
    for (VertexId j = 0; j < 4; ++j)
      if (i != j) k4.push_back({i, j, 1.0 + i});
  const auto out = maslov_sneppen_rewire(make_graph(4, k4), cfg, rng);
  EXPECT_TRUE(out.stalled);
  EXPECT_EQ(out.accepted_swaps, 0u);
}

TEST(Equidisperse, Examples) {
  std::vector<Arc> arcs{{0, 1, 6}, {0, 2, 3}, {0, 3, 2}, {0, 4, 1}, {1, 0, 5}, {1, 2, 2}};
  const auto g = equidisperse(make_graph(5, arcs));
  for (VertexId t : {1, 2, 3, 4}) EXPECT_EQ(g.weight(0, t), 3.0);
  EXPECT_EQ(g.weight(1, 0), 3.5);
  EXPECT_EQ(g.weight(1, 2), 3.5);
}

TEST(Equidisperse, PropertiesOnRandomGraphs) {
  std::mt19937_64 rng(44);
  for (int rep = 0; rep < 30; ++rep) {
    const auto g = oracle::random_graph(50, 0.15, rng, 97);
    const auto e = equidisperse(g);
    const auto ee = equidisperse(e);
    EXPECT_EQ(e, ee);
    ASSERT_EQ(e.arc_count(), g.arc_count());
    const auto ga = g.arcs(), ea = e.arcs();
    for (std::size_t i = 0; i < ga.size(); ++i) {
      EXPECT_EQ(ga[i].source, ea[i].source);
      EXPECT_EQ(ga[i].target, ea[i].target);
    }
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      EXPECT_NEAR(e.out_strength(v), g.out_strength(v), 1e-9);
      if (e.out_degree(v) >= 2) EXPECT_NEAR(concentration(e, v).h_star, 0.0, 1e-12);
    }
  }
}

TEST(ReattachWeights, PermutesOriginalWeights) {
  // 0 has partners 1, 2 with weights {5, 1}; the rewired backbone gives it 3, 4
  const std::vector<Arc> orig{{0, 1, 5}, {1, 0, 1}, {0, 2, 1}, {2, 0, 1}, {3, 4, 2}, {4, 3, 2},
                              {3, 1, 1}, {1, 3, 1}, {4, 2, 1}, {2, 4, 1}};
  const std::vector<Arc> rew{{0, 3, 1}, {3, 0, 1}, {0, 4, 1}, {4, 0, 1}, {1, 2, 1}, {2, 1, 1},
                             {3, 1, 1}, {1, 3, 1}, {4, 2, 1}, {2, 4, 1}};
  const auto g = make_graph(5, orig);
  std::set<std::vector<double>> orders;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const auto r = reattach_weights(make_graph(5, rew), g, rng);
    EXPECT_EQ(r.out_strength(0), 6.0);
    EXPECT_EQ(sorted_weights(r, 0), (std::vector<double>{1, 5}));
    orders.insert({*r.weight(0, 3), *r.weight(0, 4)});
  }
  EXPECT_EQ(orders.size(), 2u);
}

TEST(ReattachWeights, EqualWeightsAreInvariant) {
  const std::vector<Arc> orig{{0, 1, 4}, {1, 0, 4}, {2, 3, 4}, {3, 2, 4}};
  const std::vector<Arc> rew{{0, 3, 1}, {3, 0, 1}, {2, 1, 1}, {1, 2, 1}};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto r = reattach_weights(make_graph(4, rew), make_graph(4, orig), rng);
    for (const Arc& a : r.arcs()) EXPECT_EQ(a.weight, 4.0);
  }
}

TEST(ReattachWeights, DegreeMismatchIsIntegrityError) {
  const std::vector<Arc> orig{{0, 1, 1}, {1, 0, 1}};
  const std::vector<Arc> rew{{0, 2, 1}, {2, 0, 1}};
  Rng rng(1);
  EXPECT_THROW(reattach_weights(make_graph(3, rew), make_graph(3, orig), rng), IntegrityError);
}

TEST(Regimes, IdentityCellReproducesInput) {
  const auto g = assortative_graph(300, 7);
  EXPECT_EQ(apply_regime(g, RegimeConfig{}), g);
  RegimeConfig eq;
  eq.impose_equidispersion = true;
  EXPECT_EQ(apply_regime(g, eq), equidisperse(g));
}

TEST(Regimes, FourRegimesShareOneBackbone) {
  const auto g = assortative_graph(600, 8);
  const auto fr = four_regimes(g, 3, 10);
  EXPECT_EQ(fr[Regime::Observed], g);
  EXPECT_EQ(fr[Regime::ObservedEquidispersed], equidisperse(g));
  EXPECT_EQ(fr[Regime::RewiredEquidispersed], equidisperse(fr[Regime::Rewired]));
  const auto a = fr[Regime::Rewired].arcs(), b = fr[Regime::RewiredEquidispersed].arcs();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].target, b[i].target);
  EXPECT_EQ(to_string(Regime::RewiredEquidispersed), "rewired_equidispersed");
}

TEST(Regimes, OrderingOnAssortativeGraph) {
  SynthConfig cfg;
  cfg.vertex_count = 5000;
  cfg.target_assortativity = 0.33;
  cfg.dispersion = 0.59;
  cfg.seed = 12;
  const auto g = generate(cfg).graph;
  ASSERT_GE(dyad_census(g).mutual, 10000u);
  const auto fr = four_regimes(g, 12, 10);
  std::array<double, 4> mean{};
  for (Regime r : kAllRegimes) {
    const auto recs = reciprocity_records(fr[r]);
    double s = 0;
    for (const auto& rec : recs) s += rec.r_value;
    mean[static_cast<std::size_t>(r)] = s / static_cast<double>(recs.size());
  }
  const double obs_eq = mean[1], rw_eq = mean[3], obs = mean[0], rw = mean[2];
  EXPECT_LT(obs_eq, std::min(rw_eq, obs));
  EXPECT_LT(std::max(rw_eq, obs), rw);
}
