/*
  Synthetic all-mutual call graphs with tunable degree assortativity and
  weight dispersion.

  Pipeline: draw a degree sequence, pair stubs (configuration model) and
  repair self-loops/multi-edges with degree-preserving swaps, push the
  excess-degree correlation toward the target with accept-if-closer
  swaps, then give every vertex a lognormal calling propensity and split
  its strength over its neighbors. The split uses softmax(beta * z) with
  beta = dispersion / (1 - dispersion): dispersion 0 is an exact equal
  split and dispersion -> 1 concentrates on a single neighbor. Weights are
  rounded to whole calls (minimum 1).
*/
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dyadrec/graph.hpp"
#include "dyadrec/metrics.hpp"

namespace dyadrec {

enum class DegreeModel : std::uint8_t { PowerLaw, Poisson, Regular };

struct DegreeDistribution {
  DegreeModel model = DegreeModel::PowerLaw;
  // Exponent (power law), mean (Poisson) or the common degree (regular).
  double parameter = 2.5;
  std::size_t min_degree = 2;
  // 0 selects floor(sqrt(V)), the structural cutoff for uncorrelated graphs.
  std::size_t max_degree = 0;
};

struct SynthConfig {
  std::size_t vertex_count = 5000;
  DegreeDistribution degrees;
  double target_assortativity = 0.0;
  double dispersion = 0.0;  // [0, 1)
  std::uint64_t seed = 1;

  double assortativity_tolerance = 0.005;
  unsigned tuning_multiplier = 50;      // swap attempts per edge while tuning
  double median_calls_per_neighbor = 8.0;
  double propensity_sigma = 1.0;        // lognormal sigma of calling propensity
};

struct SynthResult {
  WeightedDigraph graph;
  std::optional<double> achieved_assortativity;
  bool target_reached = false;
  std::uint64_t tuning_swaps = 0;
  std::uint64_t edges_dropped = 0;  // multi-edges the repair pass could not fix
  std::vector<std::string> warnings;
};

// Throws std::invalid_argument for unusable parameters (V < 2, dispersion
// outside [0, 1), non-graphical regular sequences, ...).
SynthResult generate(const SynthConfig& cfg);

// Mean H* over vertices with out-degree >= 2 (0 when there are none).
double mean_h_star(const WeightedDigraph& g);

// Dispersion whose generated graph has mean H* within `tolerance` of the
// target, found by bisection over the same seed and topology.
double tune_dispersion(const SynthConfig& cfg, double target_mean_h_star,
                       double tolerance = 0.005);

SynthConfig synth_config_from_json(std::string_view text);
std::string synth_config_to_json(const SynthConfig& cfg);

}  // namespace dyadrec
