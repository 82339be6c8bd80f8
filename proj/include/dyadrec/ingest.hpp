/*
  Raw call logs and graph snapshots.

  events.csv     timestamp,caller,callee   (timestamp may be empty)
  <name>.csv     src,dst,weight            (dense ids)
  <name>.vertices.csv  external_id,dense_id

  Lines starting with '#' are provenance/comments and are skipped by the
  parsers; snapshot writers emit them as "# key: value".

  Dense ids are assigned after aggregation by sorting external ids
  (numerically when every id is a plain non-negative integer), so the
  resulting graph does not depend on input line order.
*/
#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dyadrec/graph.hpp"

namespace dyadrec {

struct CallEvent {
  std::string caller;
  std::string callee;
  std::optional<std::int64_t> timestamp;
};

struct IngestStats {
  std::uint64_t events_read = 0;
  std::uint64_t self_calls_dropped = 0;
  std::uint64_t malformed_lines = 0;
  std::uint64_t aggregated_weight = 0;
  std::uint64_t vertices = 0;
  std::uint64_t arcs = 0;

  // events_read == aggregated_weight + self_calls_dropped + malformed_lines
  bool balanced() const {
    return events_read == aggregated_weight + self_calls_dropped + malformed_lines;
  }
};

struct IngestOptions {
  // Abort on the first malformed line or duplicate edge-list row.
  bool strict = false;
};

/*
  Partial call-count map. Memory grows with distinct vertices and arcs,
  not with events. Counters from independent shards merge associatively
  and commutatively.
*/
class ArcCounter {
 public:
  // Returns false (and counts nothing) for a self-call.
  bool add(std::string_view caller, std::string_view callee, std::uint64_t count = 1);
  void merge(const ArcCounter& other);

  std::size_t vertex_count() const { return names_.size(); }
  std::size_t arc_count() const { return counts_.size(); }
  std::uint64_t total_weight() const { return total_; }

  WeightedDigraph build() const;

 private:
  struct NameHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  std::uint32_t intern(std::string_view name);

  std::unordered_map<std::string, std::uint32_t, NameHash, std::equal_to<>> ids_;
  std::vector<std::string> names_;
  std::unordered_map<std::uint64_t, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct Aggregation {
  WeightedDigraph graph;
  IngestStats stats;
};

Aggregation aggregate_events(std::span<const CallEvent> events);

// Streams an events.csv body. Malformed lines are skipped and counted, or
// raise ValidationError in strict mode. A missing or wrong header raises
// ValidationError.
Aggregation read_events(std::istream& in, const IngestOptions& options = {});
Aggregation read_events_file(const std::filesystem::path& path, const IngestOptions& options = {});

// One worker per file (up to `threads`), merged in file order.
Aggregation read_event_files(std::span<const std::filesystem::path> paths,
                             const IngestOptions& options = {}, unsigned threads = 1);

using Provenance = std::vector<std::pair<std::string, std::string>>;

struct Snapshot {
  WeightedDigraph graph;
  Provenance provenance;
  std::uint64_t duplicate_rows = 0;
  std::uint64_t self_loops_dropped = 0;
};

std::filesystem::path sidecar_path(const std::filesystem::path& graph_path);

// Reads src,dst,weight. With a sidecar, src/dst are dense ids and the
// sidecar supplies the vertex count and id map; without one they are
// external ids. Duplicate rows are summed (ValidationError when strict);
// non-positive weights and header mismatches raise ValidationError.
Snapshot load_snapshot(const std::filesystem::path& path, const IngestOptions& options = {});
WeightedDigraph load_edge_list(const std::filesystem::path& path,
                               const IngestOptions& options = {});

// Writes the graph and its sidecar. Weights use the shortest decimal form
// that reads back to the same double.
void save_snapshot(const WeightedDigraph& g, const std::filesystem::path& path,
                   const Provenance& provenance = {});

}  // namespace dyadrec
