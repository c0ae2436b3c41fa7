#include "newsgraph/synth/rtg.hpp"

#include <string>
#include <unordered_map>

#include "newsgraph/core/errors.hpp"
#include "newsgraph/core/rng.hpp"

namespace newsgraph::synth {

void RtgParams::validate() const {
  if (words == 0) throw DomainError("rtg: words must be positive");
  if (keys < 1 || keys > 26) throw DomainError("rtg: keys must be in [1, 26]");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("rtg: beta must be in (0, 1]");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("rtg: q must be in (0, 1)");
}

MultiGraph random_typing_graph(const RtgParams& params) {
  params.validate();
  const int k = params.keys;
  const int side = k + 1;  // index k is the space key
  // cumulative weights of the non-terminal cells, row-major
  std::vector<double> cumulative;
  double total = 0.0;
  for (int a = 0; a < side; ++a) {
    for (int b = 0; b < side; ++b) {
      if (a == k && b == k) {
        cumulative.push_back(total);
        continue;
      }
      total += a == b ? 1.0 : params.beta;
      cumulative.push_back(total);
    }
  }

  Rng rng(derive_seed(params.seed, "rtg"));
  std::unordered_map<std::string, NodeId> ids;
  auto node = [&](const std::string& label) {
    auto [it, inserted] = ids.emplace(label, static_cast<NodeId>(ids.size()));
    return it->second;
  };

  MultiGraph g;
  std::string src, dst;
  for (std::uint64_t w = 0; w < params.words; ++w) {
    src.clear();
    dst.clear();
    bool src_open = true, dst_open = true;
    while (src_open || dst_open) {
      if (rng.uniform() < params.q) break;
      const double x = rng.uniform() * total;
      int cell = 0;
      while (cell + 1 < side * side && cumulative[cell] <= x) ++cell;
      const int a = cell / side, b = cell % side;
      if (src_open) {
        if (a == k) src_open = false;
        else src.push_back(static_cast<char>('a' + a));
      }
      if (dst_open) {
        if (b == k) dst_open = false;
        else dst.push_back(static_cast<char>('a' + b));
      }
    }
    const NodeId a = node(src);
    const NodeId b = node(dst);
    if (a == b) continue;
    g.edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  g.num_nodes = ids.size();
  return g;
}

}  // namespace newsgraph::synth
