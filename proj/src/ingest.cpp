#include "dyadrec/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "dyadrec/errors.hpp"

namespace dyadrec {

namespace {

constexpr std::string_view kEventsHeader = "timestamp,caller,callee";
constexpr std::string_view kEdgeHeader = "src,dst,weight";
constexpr std::string_view kSidecarHeader = "external_id,dense_id";

bool is_plain_integer(std::string_view s) {
  if (s.empty() || (s.size() > 1 && s[0] == '0')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Dense id of each name: its rank in numeric order when every name is a
// plain integer, lexicographic order otherwise.
std::vector<std::uint32_t> dense_ranks(const std::vector<std::string>& names) {
  std::vector<std::uint32_t> order(names.size());
  std::iota(order.begin(), order.end(), 0u);
  const bool numeric = std::all_of(names.begin(), names.end(), is_plain_integer);
  std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
    const auto& a = names[x];
    const auto& b = names[y];
    if (numeric && a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  std::vector<std::uint32_t> rank(names.size());
  for (std::uint32_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

// Splits on ',' into exactly N fields; false on any other field count.
template <std::size_t N>
bool split_fields(std::string_view line, std::array<std::string_view, N>& out) {
  std::size_t start = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t comma = line.find(',', start);
    const bool last = i + 1 == N;
    if (last != (comma == std::string_view::npos)) return false;
    out[i] = line.substr(start, last ? std::string_view::npos : comma - start);
    start = comma + 1;
  }
  return true;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool skip_line(std::string_view line) { return line.empty() || line.front() == '#'; }

template <typename T>
bool parse_integer(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_weight(std::string_view s, double& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_weight(double w) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), w);
  return std::string(buf.data(), ptr);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string where(const std::filesystem::path& path, std::uint64_t line) {
  return path.string() + ":" + std::to_string(line);
}

}  // namespace

std::uint32_t ArcCounter::intern(std::string_view name) {
  if (auto it = ids_.find(name); it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

bool ArcCounter::add(std::string_view caller, std::string_view callee, std::uint64_t count) {
  if (caller == callee) return false;
  const std::uint64_t src = intern(caller);
  const std::uint64_t dst = intern(callee);
  counts_[(src << 32) | dst] += count;
  total_ += count;
  return true;
}

void ArcCounter::merge(const ArcCounter& other) {
  std::vector<std::uint32_t> remap(other.names_.size());
  for (std::size_t i = 0; i < other.names_.size(); ++i) remap[i] = intern(other.names_[i]);
  for (const auto& [key, count] : other.counts_) {
    const std::uint64_t src = remap[key >> 32];
    const std::uint64_t dst = remap[key & 0xffffffffu];
    counts_[(src << 32) | dst] += count;
  }
  total_ += other.total_;
}

WeightedDigraph ArcCounter::build() const {
  const auto rank = dense_ranks(names_);
  std::vector<std::string> ids(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) ids[rank[i]] = names_[i];
  GraphBuilder builder(names_.size());
  for (const auto& [key, count] : counts_) {
    builder.add_arc(rank[key >> 32], rank[key & 0xffffffffu], static_cast<Weight>(count));
  }
  builder.set_external_ids(std::move(ids));
  return builder.finalize();
}

namespace {

Aggregation finish(const ArcCounter& counter, IngestStats stats) {
  Aggregation out{counter.build(), stats};
  out.stats.aggregated_weight = counter.total_weight();
  out.stats.vertices = out.graph.vertex_count();
  out.stats.arcs = out.graph.arc_count();
  return out;
}

void read_events_into(std::istream& in, const IngestOptions& options, const std::string& source,
                      ArcCounter& counter, IngestStats& stats) {
  std::string raw;
  bool header_seen = false;
  std::uint64_t line_no = 0;
  std::array<std::string_view, 3> fields;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    if (skip_line(line)) continue;
    if (!header_seen) {
      if (line != kEventsHeader) {
        throw ValidationError(source + ":" + std::to_string(line_no) + ": expected header '" +
                              std::string(kEventsHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    ++stats.events_read;
    std::int64_t ts = 0;
    const bool ok = split_fields(line, fields) && !fields[1].empty() && !fields[2].empty() &&
                    (fields[0].empty() || parse_integer(fields[0], ts));
    if (!ok) {
      if (options.strict) {
        throw ValidationError(source + ":" + std::to_string(line_no) + ": malformed event line");
      }
      ++stats.malformed_lines;
      continue;
    }
    if (!counter.add(fields[1], fields[2])) ++stats.self_calls_dropped;
  }
  if (in.bad()) throw IoError("read failure in " + source);
  if (!header_seen) throw ValidationError(source + ": missing header '" + std::string(kEventsHeader) + "'");
}

}  // namespace

Aggregation aggregate_events(std::span<const CallEvent> events) {
  ArcCounter counter;
  IngestStats stats;
  for (const auto& ev : events) {
    ++stats.events_read;
    if (ev.caller.empty() || ev.callee.empty()) {
      ++stats.malformed_lines;
      continue;
    }
    if (!counter.add(ev.caller, ev.callee)) ++stats.self_calls_dropped;
  }
  return finish(counter, stats);
}

Aggregation read_events(std::istream& in, const IngestOptions& options) {
  ArcCounter counter;
  IngestStats stats;
  read_events_into(in, options, "<stream>", counter, stats);
  return finish(counter, stats);
}

Aggregation read_events_file(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in = open_input(path);
  ArcCounter counter;
  IngestStats stats;
  read_events_into(in, options, path.string(), counter, stats);
  return finish(counter, stats);
}

Aggregation read_event_files(std::span<const std::filesystem::path> paths,
                             const IngestOptions& options, unsigned threads) {
  std::vector<ArcCounter> shards(paths.size());
  std::vector<IngestStats> shard_stats(paths.size());
  std::vector<std::exception_ptr> errors(paths.size());
  const auto work = [&](std::size_t i) {
    try {
      std::ifstream in = open_input(paths[i]);
      read_events_into(in, options, paths[i].string(), shards[i], shard_stats[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, paths.size()));
  for (std::size_t base = 0; base < paths.size(); base += workers) {
    std::vector<std::thread> pool;
    for (std::size_t i = base; i < std::min(paths.size(), base + workers); ++i) {
      pool.emplace_back(work, i);
    }
    for (auto& t : pool) t.join();
  }
  ArcCounter merged;
  IngestStats stats;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    merged.merge(shards[i]);
    stats.events_read += shard_stats[i].events_read;
    stats.self_calls_dropped += shard_stats[i].self_calls_dropped;
    stats.malformed_lines += shard_stats[i].malformed_lines;
  }
  return finish(merged, stats);
}

std::filesystem::path sidecar_path(const std::filesystem::path& graph_path) {
  auto p = graph_path;
  p.replace_extension(".vertices.csv");
  return p;
}

namespace {

std::vector<std::string> load_sidecar(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string raw;
  std::uint64_t line_no = 0;
  bool header_seen = false;
  std::vector<std::pair<std::uint64_t, std::string>> rows;
  std::array<std::string_view, 2> fields;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    if (skip_line(line)) continue;
    if (!header_seen) {
      if (line != kSidecarHeader) throw ValidationError(where(path, line_no) + ": bad sidecar header");
      header_seen = true;
      continue;
    }
    std::uint64_t dense = 0;
    if (!split_fields(line, fields) || fields[0].empty() || !parse_integer(fields[1], dense)) {
      throw ValidationError(where(path, line_no) + ": malformed sidecar row");
    }
    rows.emplace_back(dense, std::string(fields[0]));
  }
  if (!header_seen) throw ValidationError(path.string() + ": missing sidecar header");
  std::vector<std::string> ids(rows.size());
  std::vector<bool> seen(rows.size(), false);
  std::unordered_set<std::string_view> names;
  for (const auto& [dense, name] : rows) {
    if (dense >= rows.size() || seen[dense]) {
      throw ValidationError(path.string() + ": dense ids must be a permutation of 0..V-1");
    }
    seen[dense] = true;
    ids[dense] = name;
  }
  for (const auto& id : ids) {
    if (!names.insert(id).second) throw ValidationError(path.string() + ": repeated external id " + id);
  }
  return ids;
}

}  // namespace

Snapshot load_snapshot(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in = open_input(path);
  const auto sidecar = sidecar_path(path);
  const bool has_sidecar = std::filesystem::exists(sidecar);
  const std::vector<std::string> ids = has_sidecar ? load_sidecar(sidecar) : std::vector<std::string>{};

  Snapshot snap;
  std::vector<std::string> raw_names;
  std::unordered_map<std::string, std::uint32_t, std::hash<std::string>> temp_ids;
  std::vector<Arc> rows;

  std::string raw;
  std::uint64_t line_no = 0;
  bool header_seen = false;
  std::array<std::string_view, 3> fields;
  const auto temp_id = [&](std::string_view name) {
    auto [it, inserted] = temp_ids.emplace(std::string(name), static_cast<std::uint32_t>(raw_names.size()));
    if (inserted) raw_names.emplace_back(name);
    return it->second;
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = line.substr(1);
      const auto colon = body.find(':');
      if (colon != std::string_view::npos) {
        auto trim = [](std::string_view s) {
          while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
          while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
          return std::string(s);
        };
        snap.provenance.emplace_back(trim(body.substr(0, colon)), trim(body.substr(colon + 1)));
      }
      continue;
    }
    if (!header_seen) {
      if (line != kEdgeHeader) {
        throw ValidationError(where(path, line_no) + ": expected header '" + std::string(kEdgeHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    double w = 0.0;
    if (!split_fields(line, fields) || fields[0].empty() || fields[1].empty() ||
        !parse_weight(fields[2], w)) {
      throw ValidationError(where(path, line_no) + ": malformed edge row");
    }
    if (!std::isfinite(w) || w <= 0.0) {
      throw ValidationError(where(path, line_no) + ": weight must be finite and positive");
    }
    Arc arc{0, 0, w};
    if (has_sidecar) {
      std::uint64_t s = 0, t = 0;
      if (!parse_integer(fields[0], s) || !parse_integer(fields[1], t) || s >= ids.size() ||
          t >= ids.size()) {
        throw ValidationError(where(path, line_no) + ": vertex id not in sidecar");
      }
      arc.source = static_cast<VertexId>(s);
      arc.target = static_cast<VertexId>(t);
    } else {
      arc.source = temp_id(fields[0]);
      arc.target = temp_id(fields[1]);
    }
    if (options.strict && arc.source == arc.target) {
      throw ValidationError(where(path, line_no) + ": self-loop");
    }
    rows.push_back(arc);
  }
  if (in.bad()) throw IoError("read failure in " + path.string());
  if (!header_seen) throw ValidationError(path.string() + ": missing header '" + std::string(kEdgeHeader) + "'");

  std::vector<std::string> external = ids;
  if (!has_sidecar) {
    const auto rank = dense_ranks(raw_names);
    external.assign(raw_names.size(), {});
    for (std::size_t i = 0; i < raw_names.size(); ++i) external[rank[i]] = raw_names[i];
    for (auto& arc : rows) {
      arc.source = rank[arc.source];
      arc.target = rank[arc.target];
    }
  }
  GraphBuilder builder(external.size());
  for (const auto& arc : rows) builder.add_arc(arc);
  builder.set_external_ids(std::move(external));
  snap.graph = builder.finalize();
  snap.duplicate_rows = builder.stats().duplicate_arcs_merged;
  snap.self_loops_dropped = builder.stats().self_loops_dropped;
  if (options.strict && snap.duplicate_rows > 0) {
    throw ValidationError(path.string() + ": " + std::to_string(snap.duplicate_rows) +
                          " duplicate (src,dst) rows");
  }
  return snap;
}

WeightedDigraph load_edge_list(const std::filesystem::path& path, const IngestOptions& options) {
  return load_snapshot(path, options).graph;
}

void save_snapshot(const WeightedDigraph& g, const std::filesystem::path& path,
                   const Provenance& provenance) {
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const std::string id = g.external_id(v);
    if (id.empty() || id.front() == '#' || id.find_first_of(",\r\n") != std::string::npos) {
      throw ValidationError("external id '" + id + "' cannot be written to CSV");
    }
  }
  std::string body;
  body.reserve(g.arc_count() * 24 + 128);
  body += "# format: dyadrec-snapshot 1\n";
  for (const auto& [key, value] : provenance) body += "# " + key + ": " + value + "\n";
  body += kEdgeHeader;
  body += '\n';
  for (const Arc& arc : g.arcs()) {
    body += std::to_string(arc.source);
    body += ',';
    body += std::to_string(arc.target);
    body += ',';
    body += format_weight(arc.weight);
    body += '\n';
  }
  std::string side;
  side += kSidecarHeader;
  side += '\n';
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    side += g.external_id(v);
    side += ',';
    side += std::to_string(v);
    side += '\n';
  }
  auto out = open_output(path);
  out << body;
  auto side_out = open_output(sidecar_path(path));
  side_out << side;
  if (!out || !side_out) throw IoError("write failure for " + path.string());
}

}  // namespace dyadrec
