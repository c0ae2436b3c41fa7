#include "newsgraph/synth/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <string>

#include "newsgraph/core/errors.hpp"

namespace newsgraph::synth {

std::vector<std::size_t> MultiGraph::degrees() const {
  std::vector<std::size_t> deg(num_nodes, 0);
  for (const auto& [a, b] : edges) {
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

namespace {

std::uint64_t parse_id(std::string_view text, std::size_t line) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError("edge list line " + std::to_string(line) + ": bad node id '" +
                      std::string(text) + "'");
  }
  return v;
}

std::string_view trim_ws(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct DisjointSets {
  std::vector<NodeId> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  NodeId find(NodeId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

/// Keeps the nodes flagged in `keep`, renumbered in increasing order.
MultiGraph induced(const MultiGraph& g, const std::vector<bool>& keep) {
  std::vector<NodeId> relabel(g.num_nodes, 0);
  NodeId next = 0;
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    if (keep[v]) relabel[v] = next++;
  }
  MultiGraph out;
  out.num_nodes = next;
  for (const auto& [a, b] : g.edges) {
    if (keep[a] && keep[b]) out.edges.emplace_back(relabel[a], relabel[b]);
  }
  return out;
}

}  // namespace

MultiGraph read_edge_list(std::istream& in) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto text = trim_ws(line);
    if (text.empty() || text.front() == '#') continue;
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) {
      throw FormatError("edge list line " + std::to_string(number) + ": expected 'a,b'");
    }
    raw.emplace_back(parse_id(trim_ws(text.substr(0, comma)), number),
                     parse_id(trim_ws(text.substr(comma + 1)), number));
  }
  std::vector<std::uint64_t> ids;
  for (const auto& [a, b] : raw) {
    if (a == b) continue;
    ids.push_back(a);
    ids.push_back(b);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.empty()) throw DomainError("edge list has no edges");
  auto index = [&](std::uint64_t id) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  MultiGraph g;
  g.num_nodes = ids.size();
  for (const auto& [a, b] : raw) {
    if (a == b) continue;
    const NodeId x = index(a), y = index(b);
    g.edges.emplace_back(std::min(x, y), std::max(x, y));
  }
  return g;
}

MultiGraph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open edge list " + path.string());
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const MultiGraph& g) {
  for (const auto& [a, b] : g.edges) out << a << ',' << b << '\n';
}

void write_edge_list(const std::filesystem::path& path, const MultiGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write edge list " + path.string());
  write_edge_list(out, g);
}

MultiGraph largest_component(const MultiGraph& g) {
  if (g.num_nodes == 0) throw DomainError("graph is empty");
  DisjointSets sets(g.num_nodes);
  for (const auto& [a, b] : g.edges) sets.unite(a, b);
  std::vector<std::size_t> nodes(g.num_nodes, 0), edges(g.num_nodes, 0);
  for (NodeId v = 0; v < g.num_nodes; ++v) ++nodes[sets.find(v)];
  for (const auto& [a, _] : g.edges) ++edges[sets.find(a)];
  NodeId best = 0;
  for (NodeId r = 0; r < g.num_nodes; ++r) {
    if (sets.find(r) != r) continue;
    if (std::tie(nodes[r], edges[r]) > std::tie(nodes[best], edges[best])) best = r;
  }
  std::vector<bool> keep(g.num_nodes);
  for (NodeId v = 0; v < g.num_nodes; ++v) keep[v] = sets.find(v) == best;
  return induced(g, keep);
}

bool is_connected(const MultiGraph& g) {
  if (g.num_nodes == 0) return false;
  DisjointSets sets(g.num_nodes);
  for (const auto& [a, b] : g.edges) sets.unite(a, b);
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    if (sets.find(v) != 0) return false;
  }
  return true;
}

IndexedGraph index_edges(MultiGraph g) {
  IndexedGraph out;
  out.simple_edges = g.edges;
  std::sort(out.simple_edges.begin(), out.simple_edges.end());
  out.simple_edges.erase(std::unique(out.simple_edges.begin(), out.simple_edges.end()),
                         out.simple_edges.end());
  out.edge_index.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    const auto it = std::lower_bound(out.simple_edges.begin(), out.simple_edges.end(), e);
    out.edge_index.push_back(static_cast<std::uint32_t>(it - out.simple_edges.begin()));
  }
  out.graph = std::move(g);
  return out;
}

double top_degree_share(const MultiGraph& g, double fraction) {
  auto deg = g.degrees();
  if (deg.empty() || g.edges.empty()) return 0.0;
  std::sort(deg.rbegin(), deg.rend());
  const auto top = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(deg.size()))));
  const auto held = std::accumulate(deg.begin(), deg.begin() + std::min(top, deg.size()),
                                    std::size_t{0});
  return static_cast<double>(held) / static_cast<double>(2 * g.edges.size());
}

MultiGraph trim(const MultiGraph& g, std::size_t nodes, std::size_t simple_edges,
                std::size_t multi_edges) {
  if (nodes < 2 || simple_edges + 1 < nodes || multi_edges < simple_edges) {
    throw DomainError("trim: inconsistent target counts");
  }
  std::map<EdgePair, std::size_t> multiplicity;
  for (const auto& e : g.edges) ++multiplicity[e];
  std::vector<std::vector<NodeId>> adj(g.num_nodes);
  for (const auto& [e, _] : multiplicity) {
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());

  const auto deg = g.degrees();
  const NodeId start = static_cast<NodeId>(std::max_element(deg.begin(), deg.end()) - deg.begin());
  std::vector<NodeId> order;
  std::vector<bool> seen(g.num_nodes, false);
  std::vector<EdgePair> tree;
  std::queue<NodeId> frontier;
  frontier.push(start);
  seen[start] = true;
  while (!frontier.empty() && order.size() < nodes) {
    const NodeId v = frontier.front();
    frontier.pop();
    order.push_back(v);
    for (NodeId w : adj[v]) {
      if (seen[w]) continue;
      seen[w] = true;
      frontier.push(w);
      tree.emplace_back(std::min(v, w), std::max(v, w));
    }
  }
  if (order.size() < nodes) throw DomainError("trim: component has too few nodes");

  std::vector<NodeId> relabel(g.num_nodes, static_cast<NodeId>(-1));
  for (std::size_t i = 0; i < order.size(); ++i) relabel[order[i]] = static_cast<NodeId>(i);
  auto inside = [&](const EdgePair& e) {
    return relabel[e.first] != static_cast<NodeId>(-1) && relabel[e.second] != static_cast<NodeId>(-1);
  };

  // spanning tree of the selected nodes: each node's discovery edge
  std::map<EdgePair, std::size_t> chosen;
  for (const auto& e : tree) {
    if (inside(e) && chosen.size() + 1 < nodes) chosen.emplace(e, 1);
  }
  std::vector<std::pair<std::size_t, EdgePair>> extra;
  for (const auto& [e, m] : multiplicity) {
    if (inside(e) && !chosen.contains(e)) extra.emplace_back(m, e);
  }
  std::stable_sort(extra.begin(), extra.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (const auto& [m, e] : extra) {
    if (chosen.size() >= simple_edges) break;
    chosen.emplace(e, 1);
  }
  if (chosen.size() < simple_edges) throw DomainError("trim: too few induced simple edges");

  std::vector<EdgePair> by_weight;
  for (const auto& [e, _] : chosen) by_weight.push_back(e);
  std::stable_sort(by_weight.begin(), by_weight.end(), [&](const EdgePair& x, const EdgePair& y) {
    return multiplicity.at(x) > multiplicity.at(y);
  });
  std::size_t total = chosen.size();
  while (total < multi_edges) {
    const std::size_t before = total;
    for (const auto& e : by_weight) {
      if (total >= multi_edges) break;
      auto& count = chosen[e];
      if (count < multiplicity.at(e)) {
        ++count;
        ++total;
      }
    }
    if (total == before) throw DomainError("trim: too few parallel edges");
  }

  MultiGraph out;
  out.num_nodes = nodes;
  for (const auto& [e, count] : chosen) {
    const NodeId a = relabel[e.first], b = relabel[e.second];
    for (std::size_t c = 0; c < count; ++c) out.edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

NewsGraph to_news_graph(const IndexedGraph& g) {
  NewsGraph out;
  out.items.reserve(g.num_nodes());
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    out.items.push_back(sha256(std::string_view("news-item/" + std::to_string(v))));
  }
  out.edges = g.simple_edges;
  return out;
}

}  // namespace newsgraph::synth
