#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ordermatch/graph.hpp"
#include "ordermatch/util.hpp"

namespace om {

// Each unordered pair is an edge independently with probability p; labels uniform.
LabeledGraph gen_er(std::size_t n, double p, std::size_t alphabet, std::uint64_t seed);

// Extended preferential-attachment model grown from an (m+1)-clique. Each step
// adds m edges between existing nodes (probability p_add), rewires m edges
// (probability p_rewire), or adds a node with m edges; endpoints are chosen
// with probability proportional to degree + 1. Rewires that would disconnect
// the graph are skipped, so the result is always connected.
LabeledGraph gen_extended_barabasi(std::size_t n, std::size_t m, double p_add, double p_rewire, std::size_t alphabet,
                                   std::uint64_t seed);

enum class GraphFamily { kErdosRenyi, kExtendedBarabasi, kMixed };

std::string_view to_string(GraphFamily f) noexcept;
GraphFamily parse_graph_family(std::string_view name);

struct SyntheticConfig {
  GraphFamily family = GraphFamily::kMixed;
  std::size_t min_nodes = 10;
  std::size_t max_nodes = 30;
  double p = 0.2;  // ER edge probability
  std::size_t m = 2;
  double p_add = 0.2;
  double p_rewire = 0.2;
  std::size_t label_alphabet_size = 1;

  void validate() const;
};

// Graph i draws its size and (for kMixed) its family from seed-derived streams,
// alternating ER and extended-BA.
std::vector<LabeledGraph> gen_synthetic(const SyntheticConfig& cfg, std::size_t count, std::uint64_t seed);

// Reads <name>_A.txt, <name>_graph_indicator.txt and the optional
// <name>_node_labels.txt from a directory. Labels are remapped to 0..L-1 in
// sorted order; self-loops and repeated edges are dropped.
std::vector<LabeledGraph> load_tu_dataset(const std::string& directory);

}  // namespace om
