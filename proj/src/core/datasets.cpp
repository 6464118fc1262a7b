#include "ordermatch/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ordermatch/error.hpp"

namespace om {

namespace {

void assign_labels(LabeledGraph& g, std::size_t alphabet, Rng& rng) {
  if (alphabet < 1) throw InvalidArgument("label alphabet must be >= 1");
  g.set_label_alphabet(alphabet);
  if (alphabet == 1) return;
  std::uniform_int_distribution<Label> pick(0, static_cast<Label>(alphabet - 1));
  for (NodeId v = 0; v < g.node_count(); ++v) g.set_label(v, pick(rng));
}

// Node chosen with probability proportional to degree + 1, optionally skipping
// nodes for which reject(v) holds. Returns false when every node is rejected.
template <typename Reject>
bool preferential(const LabeledGraph& g, Rng& rng, NodeId& out, Reject reject) {
  std::vector<double> w(g.node_count());
  double total = 0.0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    w[v] = reject(v) ? 0.0 : static_cast<double>(g.degree(v) + 1);
    total += w[v];
  }
  if (total == 0.0) return false;
  std::discrete_distribution<NodeId> pick(w.begin(), w.end());
  out = pick(rng);
  return true;
}

long long parse_integer(const std::string& token, const std::string& file, std::size_t line) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(token, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  while (pos != std::string::npos && pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
  if (pos != token.size()) throw ParseError(file + ":" + std::to_string(line) + ": expected an integer, got '" + token + "'");
  return v;
}

std::size_t parse_index(const std::string& token, const std::string& file, std::size_t line) {
  const long long v = parse_integer(token, file, line);
  if (v < 1) throw ParseError(file + ":" + std::to_string(line) + ": ids are 1-based, got " + std::to_string(v));
  return static_cast<std::size_t>(v);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

LabeledGraph gen_er(std::size_t n, double p, std::size_t alphabet, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("ER edge probability must lie in [0, 1]");
  if (n < 1) throw InvalidArgument("ER graphs need at least one node");
  Rng rng = make_rng(seed);
  LabeledGraph g(n);
  std::bernoulli_distribution coin(p);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (coin(rng)) g.add_edge(u, v);
    }
  }
  assign_labels(g, alphabet, rng);
  return g;
}

LabeledGraph gen_extended_barabasi(std::size_t n, std::size_t m, double p_add, double p_rewire, std::size_t alphabet,
                                   std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("extended-BA graphs need at least one node");
  if (m < 1) throw InvalidArgument("extended-BA needs m >= 1");
  if (!(p_add >= 0.0 && p_rewire >= 0.0 && p_add + p_rewire < 1.0)) {
    throw InvalidArgument("extended-BA needs p_add, p_rewire >= 0 with p_add + p_rewire < 1");
  }
  Rng rng = make_rng(seed);
  const std::size_t start = std::min(n, m + 1);
  LabeledGraph g(start);
  for (NodeId u = 0; u < start; ++u) {
    for (NodeId v = u + 1; v < start; ++v) g.add_edge(u, v);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (g.node_count() < n) {
    const double r = unit(rng);
    const std::size_t nodes = g.node_count();
    if (r < p_add) {
      for (std::size_t k = 0; k < m; ++k) {
        const NodeId a = static_cast<NodeId>(rng() % nodes);
        NodeId b = 0;
        if (!preferential(g, rng, b, [&](NodeId v) { return v == a || g.has_edge(a, v); })) continue;
        g.add_edge(a, b);
      }
    } else if (r < p_add + p_rewire) {
      for (std::size_t k = 0; k < m; ++k) {
        const NodeId a = static_cast<NodeId>(rng() % nodes);
        if (g.degree(a) == 0) continue;
        const auto nbrs = g.neighbors(a);
        const NodeId old = nbrs[rng() % nbrs.size()];
        NodeId b = 0;
        if (!preferential(g, rng, b, [&](NodeId v) { return v == a || g.has_edge(a, v); })) continue;
        g.remove_edge(a, old);
        g.add_edge(a, b);
        if (!is_connected(g)) {
          g.remove_edge(a, b);
          g.add_edge(a, old);
        }
      }
    } else {
      const NodeId fresh = g.add_node();
      const std::size_t links = std::min<std::size_t>(m, fresh);
      for (std::size_t k = 0; k < links; ++k) {
        NodeId b = 0;
        if (preferential(g, rng, b, [&](NodeId v) { return v == fresh || g.has_edge(fresh, v); })) g.add_edge(fresh, b);
      }
    }
  }
  assign_labels(g, alphabet, rng);
  return g;
}

std::string_view to_string(GraphFamily f) noexcept {
  switch (f) {
    case GraphFamily::kErdosRenyi: return "erdos_renyi";
    case GraphFamily::kExtendedBarabasi: return "extended_barabasi";
    case GraphFamily::kMixed: return "mixed";
  }
  return "?";
}

GraphFamily parse_graph_family(std::string_view name) {
  if (name == "erdos_renyi" || name == "er") return GraphFamily::kErdosRenyi;
  if (name == "extended_barabasi" || name == "eb") return GraphFamily::kExtendedBarabasi;
  if (name == "mixed") return GraphFamily::kMixed;
  throw InvalidArgument("unknown graph family '" + std::string(name) + "'");
}

void SyntheticConfig::validate() const {
  if (min_nodes < 1 || max_nodes < min_nodes) throw ConfigError("synthetic sizes need 1 <= min_nodes <= max_nodes");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("synthetic p must lie in [0, 1]");
  if (m < 1) throw ConfigError("synthetic m must be >= 1");
  if (!(p_add >= 0.0 && p_rewire >= 0.0 && p_add + p_rewire < 1.0)) {
    throw ConfigError("synthetic p_add and p_rewire must be >= 0 with sum < 1");
  }
  if (label_alphabet_size < 1) throw ConfigError("synthetic label_alphabet_size must be >= 1");
}

std::vector<LabeledGraph> gen_synthetic(const SyntheticConfig& cfg, std::size_t count, std::uint64_t seed) {
  cfg.validate();
  std::vector<LabeledGraph> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = make_rng(derive_seed(seed, i, 0x5e));
    const std::size_t n = std::uniform_int_distribution<std::size_t>(cfg.min_nodes, cfg.max_nodes)(rng);
    GraphFamily family = cfg.family;
    if (family == GraphFamily::kMixed) family = i % 2 == 0 ? GraphFamily::kErdosRenyi : GraphFamily::kExtendedBarabasi;
    const std::uint64_t graph_seed = derive_seed(seed, i, 0x9a);
    if (family == GraphFamily::kErdosRenyi) {
      out.push_back(gen_er(n, cfg.p, cfg.label_alphabet_size, graph_seed));
    } else {
      out.push_back(gen_extended_barabasi(n, cfg.m, cfg.p_add, cfg.p_rewire, cfg.label_alphabet_size, graph_seed));
    }
  }
  return out;
}

std::vector<LabeledGraph> load_tu_dataset(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) throw IoError("not a directory: " + directory);
  std::string prefix;
  for (const auto& entry : fs::directory_iterator(directory)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 6 && name.ends_with("_A.txt")) {
      if (!prefix.empty()) throw ParseError("several *_A.txt files in " + directory);
      prefix = name.substr(0, name.size() - 6);
    }
  }
  if (prefix.empty()) throw IoError("no *_A.txt file in " + directory);
  const fs::path dir(directory);
  const fs::path a_path = dir / (prefix + "_A.txt");
  const fs::path ind_path = dir / (prefix + "_graph_indicator.txt");
  const fs::path lab_path = dir / (prefix + "_node_labels.txt");

  // node (0-based global) -> graph index
  std::vector<std::size_t> graph_of;
  std::size_t graph_count = 0;
  {
    const auto lines = read_lines(ind_path);
    const std::string file = ind_path.filename().string();
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (blank(lines[i])) continue;
      const std::size_t gid = parse_index(lines[i], file, i + 1);
      graph_of.push_back(gid - 1);
      graph_count = std::max(graph_count, gid);
    }
  }
  std::vector<long long> raw_labels(graph_of.size(), 0);
  if (fs::exists(lab_path)) {
    const auto lines = read_lines(lab_path);
    const std::string file = lab_path.filename().string();
    std::size_t node = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (blank(lines[i])) continue;
      if (node >= raw_labels.size()) throw ParseError(file + ":" + std::to_string(i + 1) + ": more labels than nodes");
      // multi-column label files keep the first column
      const std::string first = lines[i].substr(0, lines[i].find(','));
      raw_labels[node++] = parse_integer(first, file, i + 1);
    }
    if (node != raw_labels.size()) throw ParseError(file + ": " + std::to_string(node) + " labels for " + std::to_string(raw_labels.size()) + " nodes");
  }
  std::map<long long, Label> label_ids;
  for (long long l : raw_labels) label_ids.emplace(l, 0);
  {
    Label next = 0;
    for (auto& [raw, id] : label_ids) id = next++;
  }

  std::vector<std::size_t> local(graph_of.size());
  std::vector<std::size_t> sizes(graph_count, 0);
  for (std::size_t v = 0; v < graph_of.size(); ++v) local[v] = sizes[graph_of[v]]++;
  std::vector<LabeledGraph> graphs;
  graphs.reserve(graph_count);
  const std::size_t alphabet = std::max<std::size_t>(1, label_ids.size());
  for (std::size_t gi = 0; gi < graph_count; ++gi) graphs.emplace_back(sizes[gi], alphabet);
  for (std::size_t v = 0; v < graph_of.size(); ++v) {
    graphs[graph_of[v]].set_label(static_cast<NodeId>(local[v]), label_ids.at(raw_labels[v]));
  }

  const auto lines = read_lines(a_path);
  const std::string file = a_path.filename().string();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const auto comma = lines[i].find(',');
    if (comma == std::string::npos) throw ParseError(file + ":" + std::to_string(i + 1) + ": expected 'a, b'");
    const std::size_t a = parse_index(lines[i].substr(0, comma), file, i + 1) - 1;
    const std::size_t b = parse_index(lines[i].substr(comma + 1), file, i + 1) - 1;
    if (a >= graph_of.size() || b >= graph_of.size()) {
      throw ParseError(file + ":" + std::to_string(i + 1) + ": node id beyond the graph indicator");
    }
    if (graph_of[a] != graph_of[b]) throw ParseError(file + ":" + std::to_string(i + 1) + ": edge joins two graphs");
    if (a == b) continue;
    graphs[graph_of[a]].add_edge(static_cast<NodeId>(local[a]), static_cast<NodeId>(local[b]));
  }
  for (const auto& g : graphs) g.validate();
  return graphs;
}

}  // namespace om
