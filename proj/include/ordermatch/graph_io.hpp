#pragma once

#include <string>
#include <vector>

#include "ordermatch/graph.hpp"

namespace om {

// JSON interchange: {"nodes": [{"id", "label"}], "edges": [{"u", "v", "label"?}]}
// with 0-based ids. A collection file is either a JSON array of graphs or
// {"graphs": [...]}.
std::string graph_to_json(const LabeledGraph& g);
LabeledGraph graph_from_json(const std::string& text);

LabeledGraph load_graph(const std::string& path);
void save_graph(const LabeledGraph& g, const std::string& path);

// Accepts a single graph object as a one-element collection.
std::vector<LabeledGraph> load_graphs(const std::string& path);
void save_graphs(const std::vector<LabeledGraph>& graphs, const std::string& path);

}  // namespace om
