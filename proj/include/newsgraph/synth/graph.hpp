#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "newsgraph/core/model.hpp"

namespace newsgraph::synth {

using NodeId = std::uint32_t;
using EdgePair = std::pair<NodeId, NodeId>;

/// Undirected multigraph; every edge is stored with first < second.
struct MultiGraph {
  std::size_t num_nodes = 0;
  std::vector<EdgePair> edges;

  std::vector<std::size_t> degrees() const;
  friend bool operator==(const MultiGraph&, const MultiGraph&) = default;
};

/// A multigraph plus its simple-graph view: simple edges sorted and indexed
/// 0..|E|-1, and the simple index of every multigraph edge.
struct IndexedGraph {
  MultiGraph graph;
  std::vector<EdgePair> simple_edges;
  std::vector<std::uint32_t> edge_index;

  std::size_t num_nodes() const { return graph.num_nodes; }
  std::size_t num_multi_edges() const { return graph.edges.size(); }
  std::size_t num_simple_edges() const { return simple_edges.size(); }
};

/// Lines "a,b" with non-negative integer ids; '#' starts a comment line.
/// Self-loops are dropped. Nodes of the remaining edges are renumbered by
/// increasing id.
/// Throws FormatError on malformed lines and DomainError for an empty graph.
MultiGraph read_edge_list(std::istream& in);
MultiGraph read_edge_list(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const MultiGraph& g);
void write_edge_list(const std::filesystem::path& path, const MultiGraph& g);

/// Largest connected component (most nodes, then most edges, then lowest
/// node id), renumbered by increasing original id.
MultiGraph largest_component(const MultiGraph& g);
bool is_connected(const MultiGraph& g);

IndexedGraph index_edges(MultiGraph g);

/// Share of edge endpoints held by the top `fraction` of nodes by degree
/// (at least one node).
double top_degree_share(const MultiGraph& g, double fraction);

/// Connected sub-multigraph with exactly the requested counts:
/// breadth-first node selection from the highest-degree node, a spanning
/// tree, further induced simple edges by decreasing multiplicity, then
/// parallel copies added round-robin up to each edge's original
/// multiplicity. Throws DomainError when `g` cannot supply the counts.
MultiGraph trim(const MultiGraph& g, std::size_t nodes, std::size_t simple_edges,
                std::size_t multi_edges);

NewsGraph to_news_graph(const IndexedGraph& g);

}  // namespace newsgraph::synth
