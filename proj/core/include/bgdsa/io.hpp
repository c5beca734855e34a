#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bgdsa/digraph.hpp"
#include "bgdsa/engine.hpp"
#include "bgdsa/gossip.hpp"
#include "bgdsa/kvfile.hpp"

namespace bgdsa {

/// Shortest round-trippable decimal form of a double (%.17g).
std::string format_double(double x);

/// FNV-1a 64-bit, used to fingerprint config text in output metadata.
std::uint64_t fnv1a(std::string_view data);
std::string to_hex(std::uint64_t v);

/// Graph text format: optional `#` comments, first data line `N`, then one
/// `i j` directed edge per line. Node ids are 1-based in files, 0-based in
/// the API.
Digraph load_graph_file(const std::string& path);
Digraph parse_graph_text(const std::string& text, const std::string& origin);
void save_graph_file(const std::string& path, const Digraph& graph);

/// Gossip parameter sections, shared between standalone parameter files and
/// experiment configs:
///   [clock]     p = v1, ..., vN   (or uniform = true)
///   [reception] default = x and/or per-edge `i->j = x`; omitted edges get 1
///   [mixing]    default = x and/or per-edge `i->j = x`; no built-in default
/// Node ids in edge keys are 1-based.
GossipParams gossip_params_from_kv(KvFile& kv, Digraph graph);
GossipParams load_gossip_params_file(const std::string& path, Digraph graph);

/// Per-edge vector from one `[section]` with `default` and `i->j` overrides.
/// Entries not covered take `fallback`; with no fallback every edge must be
/// covered or the section is rejected.
Vec edge_values_from_kv(KvFile& kv, const std::string& section, const Digraph& graph,
                        std::optional<double> fallback);
std::string gossip_params_to_text(const GossipParams& params);
void save_gossip_params_file(const std::string& path, const GossipParams& params);

/// Metadata stamped as `#` lines at the top of every CSV artifact. The body
/// below the header is a pure function of config + seed.
struct CsvMeta {
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string variant;
  std::vector<std::pair<std::string, std::string>> extra;
};

/// Rows `iter,node,value` (scalar state) or `iter,node,value,dim`. Node and
/// dim ids are 1-based in files.
void write_trace_csv(const std::string& path, const Trace& trace, const CsvMeta& meta);

struct SummaryRow {
  std::int64_t iter = 0;
  double disagreement = 0.0;
  double mse = 0.0;
};

/// Rows `iter,disagreement,mse`.
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows,
                       const CsvMeta& meta);

/// Rows `lag,mean,se` of a product-decay series.
void write_decay_csv(const std::string& path, const DecaySeries& series, const CsvMeta& meta);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace bgdsa
