#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "graph.hpp"

namespace squashscope {

enum class GraphFormat { edge_list, json };

/// Picks the format from the extension: ".json" is JSON, anything else is an
/// edge list.
inline GraphFormat format_from_path(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".json") return GraphFormat::json;
  return GraphFormat::edge_list;
}

/// Parses whitespace-separated "u v" lines. '#' starts a comment. A comment of
/// the form "# n N" declares the node count, so isolated trailing nodes
/// survive a round trip; otherwise n is the largest index plus one.
inline Graph parse_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  int declared_n = -1, max_index = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) {
      std::istringstream meta(line.substr(hash + 1));
      std::string key;
      long long value;
      if (meta >> key && key == "n" && meta >> value) {
        if (value < 1) throw ParseError("declared node count must be positive", lineno);
        declared_n = static_cast<int>(value);
      }
      line.erase(hash);
    }
    std::istringstream ls(line);
    std::string a_tok, b_tok, extra;
    if (!(ls >> a_tok)) continue;
    if (!(ls >> b_tok)) throw ParseError("expected two node indices", lineno);
    if (ls >> extra) throw ParseError("unexpected token '" + extra + "'", lineno);
    auto to_index = [&](const std::string& tok) {
      std::size_t used = 0;
      long long x;
      try {
        x = std::stoll(tok, &used);
      } catch (const std::exception&) {
        throw ParseError("not an integer: '" + tok + "'", lineno);
      }
      if (used != tok.size()) throw ParseError("not an integer: '" + tok + "'", lineno);
      if (x < 0 || x > 10'000'000) throw ParseError("node index out of range: " + tok, lineno);
      return static_cast<int>(x);
    };
    int a = to_index(a_tok), b = to_index(b_tok);
    if (a == b) throw ParseError("self-loop at node " + std::to_string(a), lineno);
    max_index = std::max({max_index, a, b});
    edges.emplace_back(a, b);
  }
  int n = declared_n > 0 ? declared_n : max_index + 1;
  if (n < 1) throw ParseError("empty edge list", lineno);
  if (max_index >= n) throw ParseError("node index exceeds declared n", lineno);
  return Graph::from_edges(n, std::move(edges));
}

inline void write_edge_list(const Graph& g, std::ostream& out) {
  out << "# n " << g.n() << "\n";
  for (auto [a, b] : g.edges()) out << a << " " << b << "\n";
}

inline nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (auto [a, b] : g.edges()) edges.push_back({a, b});
  return {{"n", g.n()}, {"edges", edges}};
}

inline Graph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("edges")) {
    throw ParseError("graph JSON needs keys \"n\" and \"edges\"", 1);
  }
  int n = j.at("n").get<int>();
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw ParseError("edge must be a [u, v] pair", 1);
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return Graph::from_edges(n, std::move(edges));
}

inline Graph load_graph(const std::string& path, GraphFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  if (format == GraphFormat::edge_list) return parse_edge_list(in);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 1);
  }
  try {
    return graph_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed graph JSON: ") + e.what(), 1);
  }
}

inline Graph load_graph(const std::string& path) { return load_graph(path, format_from_path(path)); }

inline void save_graph(const Graph& g, const std::string& path, GraphFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  if (format == GraphFormat::edge_list) {
    write_edge_list(g, out);
  } else {
    out << graph_to_json(g).dump() << "\n";
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

inline void save_graph(const Graph& g, const std::string& path) { save_graph(g, path, format_from_path(path)); }

}  // namespace squashscope
