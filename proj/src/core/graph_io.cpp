#include "ordermatch/graph_io.hpp"

#include <algorithm>

#include "json.hpp"
#include "ordermatch/error.hpp"
#include "ordermatch/util.hpp"

namespace om {

using nlohmann::json;

namespace {

json to_json_value(const LabeledGraph& g) {
  json nodes = json::array();
  for (NodeId u = 0; u < g.node_count(); ++u) nodes.push_back({{"id", u}, {"label", g.label(u)}});
  json edges = json::array();
  for (const Edge& e : g.edges()) {
    json je = {{"u", e.u}, {"v", e.v}};
    if (e.label) je["label"] = *e.label;
    edges.push_back(std::move(je));
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

std::uint64_t read_index(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing \"" + key + "\"");
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw ParseError(where + ": \"" + key + "\" must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

LabeledGraph from_json_value(const json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("edges")) {
    throw ParseError("graph object needs \"nodes\" and \"edges\"");
  }
  const json& nodes = j["nodes"];
  const json& edges = j["edges"];
  if (!nodes.is_array() || !edges.is_array()) throw ParseError("\"nodes\" and \"edges\" must be arrays");

  std::vector<std::int64_t> labels(nodes.size(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const auto id = read_index(nodes[i], "id", where);
    if (id >= nodes.size()) throw ParseError(where + ": id " + std::to_string(id) + " out of range");
    if (labels[id] >= 0) throw ParseError(where + ": duplicate id " + std::to_string(id));
    labels[id] = nodes[i].contains("label") ? static_cast<std::int64_t>(read_index(nodes[i], "label", where)) : 0;
  }
  std::size_t alphabet = 1;
  for (auto l : labels) alphabet = std::max<std::size_t>(alphabet, static_cast<std::size_t>(l) + 1);

  LabeledGraph g(nodes.size(), alphabet);
  for (NodeId u = 0; u < labels.size(); ++u) g.set_label(u, static_cast<Label>(labels[u]));
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "]";
    const auto u = read_index(edges[i], "u", where);
    const auto v = read_index(edges[i], "v", where);
    if (u >= g.node_count() || v >= g.node_count()) throw ParseError(where + ": endpoint out of range");
    if (u == v) throw ParseError(where + ": self-loop");
    std::optional<Label> el;
    if (edges[i].contains("label")) el = static_cast<Label>(read_index(edges[i], "label", where));
    if (!g.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v), el)) {
      throw ParseError(where + ": duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
    }
  }
  return g;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string graph_to_json(const LabeledGraph& g) { return to_json_value(g).dump(); }

LabeledGraph graph_from_json(const std::string& text) { return from_json_value(parse(text)); }

LabeledGraph load_graph(const std::string& path) {
  try {
    return graph_from_json(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_graph(const LabeledGraph& g, const std::string& path) { write_file_atomic(path, graph_to_json(g) + "\n"); }

std::vector<LabeledGraph> load_graphs(const std::string& path) {
  try {
    const json j = parse(read_file(path));
    const json* list = &j;
    if (j.is_object() && j.contains("graphs")) list = &j["graphs"];
    std::vector<LabeledGraph> out;
    if (list->is_array()) {
      for (std::size_t i = 0; i < list->size(); ++i) {
        try {
          out.push_back(from_json_value((*list)[i]));
        } catch (const ParseError& e) {
          throw ParseError("graphs[" + std::to_string(i) + "]: " + e.what());
        }
      }
    } else {
      out.push_back(from_json_value(*list));
    }
    return out;
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_graphs(const std::vector<LabeledGraph>& graphs, const std::string& path) {
  json list = json::array();
  for (const auto& g : graphs) list.push_back(to_json_value(g));
  write_file_atomic(path, json{{"graphs", std::move(list)}}.dump() + "\n");
}

}  // namespace om
