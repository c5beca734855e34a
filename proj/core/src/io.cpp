#include "bgdsa/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bgdsa/version.hpp"

namespace bgdsa {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& message) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + message);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void write_meta(std::ofstream& out, const CsvMeta& meta) {
  out << "# config_hash = " << meta.config_hash << "\n";
  out << "# master_seed = " << meta.master_seed << "\n";
  out << "# variant = " << (meta.variant.empty() ? "-" : meta.variant) << "\n";
  out << "# toolkit_version = " << kVersion << "\n";
  for (const auto& [key, value] : meta.extra) {
    out << "# " << key << " = " << value << "\n";
  }
}

// Edge keys look like `3->7` with 1-based endpoints.
bool parse_edge_key(const std::string& key, int n_nodes, int* from, int* to) {
  const std::size_t arrow = key.find("->");
  if (arrow == std::string::npos) return false;
  try {
    std::size_t used = 0;
    const int f = std::stoi(key.substr(0, arrow), &used);
    if (used != arrow) return false;
    const std::string rest = key.substr(arrow + 2);
    const int t = std::stoi(rest, &used);
    if (used != rest.size()) return false;
    if (f < 1 || f > n_nodes || t < 1 || t > n_nodes) return false;
    *from = f - 1;
    *to = t - 1;
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

// Fills one per-edge array from a section with optional `default` plus
// per-edge overrides. Returns false if neither is present.
bool fill_edge_values(KvFile& kv, const std::string& section, const Digraph& graph,
                      Vec* values) {
  if (!kv.has_section(section)) return false;
  bool any = false;
  if (kv.has(section, "default")) {
    values->setConstant(kv.get_double(section, "default"));
    any = true;
  }
  for (const std::string& key : kv.keys(section)) {
    if (key == "default") continue;
    int from = 0, to = 0;
    if (!parse_edge_key(key, graph.n_nodes(), &from, &to)) {
      throw std::runtime_error(kv.origin() + ": [" + section + "] key `" + key +
                               "` is not an edge (`i->j` with 1-based in-range endpoints)");
    }
    const auto id = graph.edge_id(from, to);
    if (!id) {
      throw std::runtime_error(kv.origin() + ": [" + section + "] edge `" + key +
                               "` is not in the graph");
    }
    (*values)[*id] = kv.get_double(section, key);
    any = true;
  }
  return any;
}

}  // namespace

Digraph parse_graph_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  int n_nodes = -1;
  std::vector<Edge> edges;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    if (raw.find_first_not_of(" \t\r\f\v") == std::string::npos) continue;
    std::istringstream fields(raw);
    if (n_nodes < 0) {
      if (!(fields >> n_nodes)) parse_fail(origin, line_no, "expected node count `N`");
      if (n_nodes < 1) parse_fail(origin, line_no, "node count must be positive");
      std::string tail;
      if (fields >> tail) parse_fail(origin, line_no, "expected only `N` on the first data line");
      continue;
    }
    int from = 0, to = 0;
    if (!(fields >> from)) parse_fail(origin, line_no, "expected `i j` edge line");
    if (!(fields >> to)) parse_fail(origin, line_no, "expected `i j` edge line");
    std::string tail;
    if (fields >> tail) parse_fail(origin, line_no, "expected only `i j` on an edge line");
    if (from < 1 || from > n_nodes || to < 1 || to > n_nodes) {
      parse_fail(origin, line_no, "edge endpoint out of range [1, N]");
    }
    edges.push_back(Edge{from - 1, to - 1});
  }
  if (n_nodes < 0) throw std::runtime_error(origin + ": empty graph file");
  return Digraph(n_nodes, edges);
}

Digraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph_text(buf.str(), path);
}

void save_graph_file(const std::string& path, const Digraph& graph) {
  std::ofstream out = open_out(path);
  out << graph.n_nodes() << "\n";
  for (int i = 0; i < graph.n_nodes(); ++i) {
    for (int j : graph.out_neighbors(i)) {
      out << i + 1 << " " << j + 1 << "\n";
    }
  }
}

Vec edge_values_from_kv(KvFile& kv, const std::string& section, const Digraph& graph,
                        std::optional<double> fallback) {
  Vec values = Vec::Constant(graph.n_edges(), fallback.value_or(-1.0));
  fill_edge_values(kv, section, graph, &values);
  if (!fallback) {
    for (Eigen::Index e = 0; e < values.size(); ++e) {
      if (values[e] < 0.0) {
        const Edge edge = graph.edges()[e];
        throw std::runtime_error(kv.origin() + ": [" + section + "] gives no value for edge " +
                                 std::to_string(edge.first + 1) + "->" +
                                 std::to_string(edge.second + 1));
      }
    }
  }
  return values;
}

GossipParams gossip_params_from_kv(KvFile& kv, Digraph graph) {
  GossipParams params;
  const int n = graph.n_nodes();
  params.graph = std::move(graph);

  if (kv.get_bool_or("clock", "uniform", false)) {
    params.clock_probs = Vec::Constant(n, 1.0 / n);
  } else {
    const std::vector<double> p = kv.get_doubles("clock", "p");
    if (static_cast<int>(p.size()) != n) {
      throw std::runtime_error(kv.origin() + ": [clock] p has " + std::to_string(p.size()) +
                               " entries; graph has " + std::to_string(n) + " nodes");
    }
    params.clock_probs = Eigen::Map<const Vec>(p.data(), n);
  }

  params.reception_probs = Vec::Ones(params.graph.n_edges());
  fill_edge_values(kv, "reception", params.graph, &params.reception_probs);

  params.mixing_weights = Vec::Constant(params.graph.n_edges(), -1.0);
  if (!fill_edge_values(kv, "mixing", params.graph, &params.mixing_weights)) {
    throw std::runtime_error(kv.origin() + ": missing [mixing] section; mixing weights have no default");
  }
  for (Eigen::Index e = 0; e < params.mixing_weights.size(); ++e) {
    if (params.mixing_weights[e] < 0.0) {
      const Edge edge = params.graph.edges()[e];
      throw std::runtime_error(kv.origin() + ": no mixing weight for edge " +
                               std::to_string(edge.first + 1) + "->" +
                               std::to_string(edge.second + 1) +
                               " (set [mixing] default or list the edge)");
    }
  }

  validate(params);
  return params;
}

GossipParams load_gossip_params_file(const std::string& path, Digraph graph) {
  KvFile kv = KvFile::parse_file(path);
  GossipParams params = gossip_params_from_kv(kv, std::move(graph));
  kv.check_consumed();
  return params;
}

std::string gossip_params_to_text(const GossipParams& params) {
  std::ostringstream out;
  out << "[clock]\np =";
  for (Eigen::Index i = 0; i < params.clock_probs.size(); ++i) {
    out << (i ? ", " : " ") << format_double(params.clock_probs[i]);
  }
  out << "\n\n[reception]\n";
  for (int e = 0; e < params.graph.n_edges(); ++e) {
    const Edge edge = params.graph.edges()[e];
    out << edge.first + 1 << "->" << edge.second + 1 << " = "
        << format_double(params.reception_probs[e]) << "\n";
  }
  out << "\n[mixing]\n";
  for (int e = 0; e < params.graph.n_edges(); ++e) {
    const Edge edge = params.graph.edges()[e];
    out << edge.first + 1 << "->" << edge.second + 1 << " = "
        << format_double(params.mixing_weights[e]) << "\n";
  }
  return out.str();
}

void save_gossip_params_file(const std::string& path, const GossipParams& params) {
  write_text_file(path, gossip_params_to_text(params));
}

void write_trace_csv(const std::string& path, const Trace& trace, const CsvMeta& meta) {
  std::ofstream out = open_out(path);
  write_meta(out, meta);
  const bool with_dim = trace.dim > 1;
  out << (with_dim ? "iter,node,value,dim" : "iter,node,value") << "\n";
  for (const TraceSample& sample : trace.samples) {
    for (int j = 0; j < trace.n_nodes; ++j) {
      for (int d = 0; d < trace.dim; ++d) {
        out << sample.iter << "," << j + 1 << "," << format_double(sample.state(j, d));
        if (with_dim) out << "," << d + 1;
        out << "\n";
      }
    }
  }
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows,
                       const CsvMeta& meta) {
  std::ofstream out = open_out(path);
  write_meta(out, meta);
  out << "iter,disagreement,mse\n";
  for (const SummaryRow& row : rows) {
    out << row.iter << "," << format_double(row.disagreement) << ","
        << format_double(row.mse) << "\n";
  }
}

void write_decay_csv(const std::string& path, const DecaySeries& series, const CsvMeta& meta) {
  std::ofstream out = open_out(path);
  write_meta(out, meta);
  out << "lag,mean,se\n";
  for (Eigen::Index m = 0; m < series.mean.size(); ++m) {
    out << m << "," << format_double(series.mean[m]) << "," << format_double(series.se[m])
        << "\n";
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out = open_out(path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace bgdsa
