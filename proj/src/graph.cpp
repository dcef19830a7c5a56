#include "oqw/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace oqw {

namespace {

void finalize(WalkGraph& g) {
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  g.in_neighbors.assign(g.node_count, {});
  g.out_neighbors.assign(g.node_count, {});
  for (const auto& [from, to] : g.edges) {
    g.out_neighbors[from - 1].push_back(to);
    g.in_neighbors[to - 1].push_back(from);
  }
  // edges are sorted by (from, to), so out lists are ascending already
  for (auto& v : g.in_neighbors) std::sort(v.begin(), v.end());
}

void check_node(const WalkGraph& g, int node, const char* fn) {
  if (node < 1 || node > g.node_count)
    throw std::invalid_argument(std::string(fn) + ": node index out of range");
}

}  // namespace

WalkGraph make_circle(int m) {
  if (m < 2) throw std::invalid_argument("make_circle: need at least 2 nodes");
  WalkGraph g;
  g.node_count = m;
  g.tag = Topology::circle;
  for (int i = 1; i <= m; ++i) {
    const int right = i % m + 1;
    const int left = (i + m - 2) % m + 1;
    g.edges.emplace_back(i, right);
    g.edges.emplace_back(i, left);
  }
  finalize(g);
  return g;
}

WalkGraph make_chain(int m) {
  if (m < 2) throw std::invalid_argument("make_chain: need at least 2 nodes");
  WalkGraph g;
  g.node_count = m;
  g.tag = Topology::chain;
  for (int i = 1; i < m; ++i) {
    g.edges.emplace_back(i, i + 1);
    g.edges.emplace_back(i + 1, i);
  }
  finalize(g);
  return g;
}

WalkGraph make_custom(int m, std::vector<std::pair<int, int>> edges) {
  if (m < 1) throw std::invalid_argument("make_custom: need at least 1 node");
  WalkGraph g;
  g.node_count = m;
  g.tag = Topology::custom;
  for (const auto& [from, to] : edges) {
    if (from < 1 || from > m || to < 1 || to > m)
      throw std::invalid_argument("make_custom: edge endpoint out of range");
    if (from == to)
      throw std::invalid_argument("make_custom: self-loops are implicit, not edges");
  }
  g.edges = std::move(edges);
  finalize(g);
  return g;
}

const std::vector<int>& neighbors_in(const WalkGraph& g, int node) {
  check_node(g, node, "neighbors_in");
  return g.in_neighbors[node - 1];
}

const std::vector<int>& neighbors_out(const WalkGraph& g, int node) {
  check_node(g, node, "neighbors_out");
  return g.out_neighbors[node - 1];
}

bool has_edge(const WalkGraph& g, int from, int to) {
  return edge_index(g, from, to) >= 0;
}

int edge_index(const WalkGraph& g, int from, int to) {
  const auto it = std::lower_bound(g.edges.begin(), g.edges.end(), std::pair{from, to});
  if (it == g.edges.end() || *it != std::pair{from, to}) return -1;
  return static_cast<int>(it - g.edges.begin());
}

const char* topology_name(Topology t) {
  switch (t) {
    case Topology::circle: return "circle";
    case Topology::chain: return "chain";
    default: return "custom";
  }
}

}  // namespace oqw
