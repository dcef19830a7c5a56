// oqw/graph.hpp: node and directed-edge structure of the walk.
#pragma once

#include <utility>
#include <vector>

namespace oqw {

enum class Topology { circle, chain, custom };

// Nodes are 1-indexed. Self-loops are implicit (every node carries a loop
// operator in a transition table) and never appear in `edges`.
struct WalkGraph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;  // (from, to), sorted, unique
  Topology tag = Topology::custom;
  std::vector<std::vector<int>> in_neighbors;   // per node, ascending
  std::vector<std::vector<int>> out_neighbors;  // per node, ascending
};

WalkGraph make_circle(int m);  // edges {(i, i+-1 mod m)}, 2m of them (2 when m == 2)
WalkGraph make_chain(int m);   // edges {(i, i+-1)}, 2(m-1) of them
WalkGraph make_custom(int m, std::vector<std::pair<int, int>> edges);

const std::vector<int>& neighbors_in(const WalkGraph& g, int node);
const std::vector<int>& neighbors_out(const WalkGraph& g, int node);
bool has_edge(const WalkGraph& g, int from, int to);

// Position of (from, to) in g.edges, -1 when absent.
int edge_index(const WalkGraph& g, int from, int to);

const char* topology_name(Topology t);

}  // namespace oqw
