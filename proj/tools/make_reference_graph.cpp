// Generates the shipped reference news graph: random-typing multigraph,
// largest component, trimmed to the target counts.

#include <iostream>

#include "CLI11.hpp"
#include "newsgraph/core/errors.hpp"
#include "newsgraph/synth/graph.hpp"
#include "newsgraph/synth/rtg.hpp"
#include "newsgraph/synth/votes.hpp"

namespace ns = newsgraph::synth;

int main(int argc, char** argv) {
  CLI::App app{"Generate the reference news graph"};
  ns::RtgParams params{.words = 400000, .keys = 5, .beta = 0.6, .q = 0.4, .seed = 1};
  std::size_t nodes = 13343, simple = 22885, multi = 48102;
  std::string out = ns::reference_graph_path().string();
  bool stats_only = false;
  app.add_option("--words", params.words, "Edges typed");
  app.add_option("--keys", params.keys, "Keyboard characters");
  app.add_option("--beta", params.beta, "Off-diagonal cell weight");
  app.add_option("--q", params.q, "Space probability");
  app.add_option("--seed", params.seed, "Generator seed");
  app.add_option("--nodes", nodes, "Target nodes");
  app.add_option("--simple-edges", simple, "Target simple edges");
  app.add_option("--multi-edges", multi, "Target multigraph edges");
  app.add_option("--out", out, "Output edge list");
  app.add_flag("--stats-only", stats_only, "Print component statistics and exit");
  CLI11_PARSE(app, argc, argv);

  try {
    params.validate();
    const auto raw = ns::random_typing_graph(params);
    const auto lcc = ns::largest_component(raw);
    const auto indexed = ns::index_edges(lcc);
    std::cout << "generated: nodes=" << raw.num_nodes << " edges=" << raw.edges.size() << "\n"
              << "component: nodes=" << lcc.num_nodes << " simple=" << indexed.num_simple_edges()
              << " multi=" << lcc.edges.size() << "\n";
    if (stats_only) return 0;
    const auto g = ns::trim(lcc, nodes, simple, multi);
    std::cout << "trimmed:   nodes=" << g.num_nodes << " multi=" << g.edges.size()
              << " top1%=" << ns::top_degree_share(g, 0.01) << "\n";
    ns::write_edge_list(out, g);
    std::cout << "wrote " << out << "\n";
  } catch (const newsgraph::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
