#include <gtest/gtest.h>

#include <cmath>

#include "dyadrec/metrics.hpp"
#include "dyadrec/synth.hpp"
#include "support/oracles.hpp"

using namespace dyadrec;

namespace {

SynthConfig small(double r, double dispersion, std::uint64_t seed = 1) {
  SynthConfig cfg;
  cfg.vertex_count = 1500;
  cfg.target_assortativity = r;
  cfg.dispersion = dispersion;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(Synth, ZeroDispersionIsEquidispersed) {
  const auto g = generate(small(0.2, 0.0)).graph;
  for (const auto& s : concentration_scores(g)) EXPECT_NEAR(s.h_star, 0.0, 1e-12);
}

TEST(Synth, RegularNeutralEquidispersedGivesZeroReciprocity) {
  SynthConfig cfg = small(0.0, 0.0);
  cfg.degrees.model = DegreeModel::Regular;
  cfg.degrees.parameter = 4;
  const auto res = generate(cfg);
  for (VertexId v = 0; v < res.graph.vertex_count(); ++v) EXPECT_EQ(res.graph.out_degree(v), 4u);
  for (const auto& rec : reciprocity_records(res.graph)) EXPECT_NEAR(rec.r_value, 0.0, 1e-12);
}

TEST(Synth, AllMutualAndGraphCoreInvariants) {
  const auto g = generate(small(0.3, 0.5)).graph;
  const auto c = dyad_census(g);
  EXPECT_EQ(c.asymmetric, 0u);
  EXPECT_EQ(2 * c.mutual, c.total_arcs);
  EXPECT_EQ(c.mutual + c.asymmetric + c.null_dyads, g.vertex_count() * (g.vertex_count() - 1) / 2);
  for (const Arc& a : g.arcs()) {
    EXPECT_NE(a.source, a.target);
    EXPECT_GE(a.weight, 1.0);
    EXPECT_EQ(a.weight, std::floor(a.weight));
  }
}

TEST(Synth, SameSeedSameGraph) {
  EXPECT_EQ(generate(small(0.3, 0.5, 4)).graph, generate(small(0.3, 0.5, 4)).graph);
  EXPECT_FALSE(generate(small(0.3, 0.5, 4)).graph == generate(small(0.3, 0.5, 5)).graph);
}

TEST(Synth, HitsAssortativityTarget) {
  for (double target : {-0.1, 0.0, 0.2, 0.33}) {
    const auto res = generate(small(target, 0.4, 7));
    ASSERT_TRUE(res.achieved_assortativity);
    EXPECT_NEAR(*res.achieved_assortativity, target, 0.05) << "target " << target;
    EXPECT_NEAR(degree_assortativity(res.graph).r, *res.achieved_assortativity, 1e-12);
  }
}

TEST(Synth, AcceptanceScaleConfiguration) {
  SynthConfig cfg;
  cfg.vertex_count = 5000;
  cfg.target_assortativity = 0.33;
  cfg.seed = 2;
  cfg.dispersion = tune_dispersion(cfg, 0.3);
  const auto res = generate(cfg);
  const double r = degree_assortativity(res.graph).r;
  EXPECT_GE(r, 0.28);
  EXPECT_LE(r, 0.38);
  EXPECT_NEAR(mean_h_star(res.graph), 0.3, 0.01);
}

TEST(Synth, DispersionIsMonotoneInMeanHStar) {
  std::vector<double> d, h;
  for (int i = 0; i <= 12; ++i) {
    const double disp = i * 0.075;
    d.push_back(disp);
    h.push_back(mean_h_star(generate(small(0.2, disp, 3)).graph));
  }
  EXPECT_GT(oracle::spearman(d, h), 0.9);
}

TEST(Synth, RejectsBadConfig) {
  EXPECT_THROW(generate(small(0.0, 1.0)), std::invalid_argument);
  EXPECT_THROW(generate(small(0.0, -0.1)), std::invalid_argument);
  SynthConfig tiny = small(0.0, 0.0);
  tiny.vertex_count = 1;
  EXPECT_THROW(generate(tiny), std::invalid_argument);
  SynthConfig odd = small(0.0, 0.0);
  odd.vertex_count = 5;
  odd.degrees.model = DegreeModel::Regular;
  odd.degrees.parameter = 3;
  EXPECT_THROW(generate(odd), std::invalid_argument);
  EXPECT_THROW(synth_config_from_json("{\"degree_model\": \"lattice\"}"), std::invalid_argument);
  EXPECT_THROW(synth_config_from_json("{not json"), std::invalid_argument);
}

TEST(Synth, ConfigJsonRoundTrip) {
  SynthConfig cfg = small(0.25, 0.4, 11);
  cfg.degrees.model = DegreeModel::Poisson;
  cfg.degrees.parameter = 6;
  cfg.degrees.max_degree = 30;
  const auto back = synth_config_from_json(synth_config_to_json(cfg));
  EXPECT_EQ(synth_config_to_json(back), synth_config_to_json(cfg));
  EXPECT_EQ(back.degrees.model, DegreeModel::Poisson);
  EXPECT_EQ(back.seed, 11u);
}
