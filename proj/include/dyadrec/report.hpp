/*
  Per-network analysis reports and the four-regime comparison.

  report.json carries `"schema": 1`; keys are emitted in sorted order and
  doubles in shortest round-trip form, so identical inputs give identical
  bytes and a parse/re-emit cycle is the identity.
*/
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dyadrec/graph.hpp"
#include "dyadrec/metrics.hpp"
#include "dyadrec/nullmodels.hpp"

namespace dyadrec {

inline constexpr int kReportSchema = 1;
inline constexpr std::array<double, 5> kHStarQuantiles{0.10, 0.25, 0.50, 0.75, 0.90};

struct ReportProvenance {
  std::string regime = "observed";
  std::optional<std::uint64_t> seed;
  std::string input_digest;  // graph_digest() of the analyzed graph
};

struct QuantilePoint {
  double q = 0.0;
  double value = 0.0;
};

struct AnalysisReport {
  DyadCensus census;
  std::array<double, 3> class_proportions{};  // reciprocal, partial, non-reciprocal
  double mean_r = 0.0;
  double median_r = 0.0;
  ReciprocityHistogram histogram;
  std::optional<AssortativityResult> assortativity;  // absent when undefined
  std::vector<QuantilePoint> h_star_quantiles;       // empty without k >= 2 vertices
  std::uint64_t h_star_vertices = 0;
  ReportProvenance provenance;
};

struct AnalysisOptions {
  double bin_width = kDefaultBinWidth;
  unsigned threads = 1;
  AssortativityScope scope = AssortativityScope::MutualBackbone;
};

// FNV-1a 64 over vertex count, arcs (ids and weight bits) and the id map,
// as 16 hex digits.
std::string graph_digest(const WeightedDigraph& g);

// Linear interpolation between order statistics (type 7). `sorted` must be
// non-empty and ascending.
double quantile(std::span<const double> sorted, double q);

AnalysisReport analyze(const WeightedDigraph& g, const ReportProvenance& provenance = {},
                       const AnalysisOptions& options = {});

enum class ReportFormat : std::uint8_t { Json, Csv };

std::string emit_report(const AnalysisReport& report, ReportFormat format);
AnalysisReport parse_report_json(std::string_view text);
// Throws IoError when the file cannot be written.
void write_report(const AnalysisReport& report, ReportFormat format,
                  const std::filesystem::path& path);

struct OrderingVerdict {
  std::array<double, 4> mean_r{};  // indexed by Regime
  // obs_eq < rw_eq < obs < rw
  bool strict_ordering = false;
  // obs_eq < min(rw_eq, obs) <= max(rw_eq, obs) < rw
  bool partial_ordering = false;
  // all four means equal
  bool degenerate = false;
  bool extreme_share_increases = false;     // non-reciprocal share: obs_eq < rw
  bool reciprocal_share_decreases = false;  // reciprocal share: obs_eq > rw
  std::string label;
};

OrderingVerdict ordering_verdict(const std::array<AnalysisReport, 4>& reports);

struct RegimeComparison {
  std::array<std::optional<AnalysisReport>, 4> reports;  // indexed by Regime
  std::optional<OrderingVerdict> verdict;
  std::uint64_t seed = 0;
  unsigned swap_multiplier = 0;
  std::uint64_t attempted_swaps = 0;
  std::uint64_t accepted_swaps = 0;
  std::optional<double> residual_assortativity;
  bool stalled = false;
  std::string failure;  // non-empty when a regime failed; reports before it are kept

  bool complete() const { return failure.empty() && verdict.has_value(); }
};

// Builds the four regimes and analyzes each. Does not throw for regime
// failures: the message lands in `failure` and finished reports are kept.
// Throws std::domain_error when g has no mutual dyad.
RegimeComparison run_regime_comparison(const WeightedDigraph& g, std::uint64_t seed,
                                       unsigned swap_multiplier,
                                       const AnalysisOptions& options = {},
                                       FourRegimes* regimes_out = nullptr);

std::string emit_comparison_json(const RegimeComparison& cmp);

}  // namespace dyadrec
