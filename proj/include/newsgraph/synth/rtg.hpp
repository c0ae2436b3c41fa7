#pragma once

#include <cstdint>

#include "newsgraph/synth/graph.hpp"

namespace newsgraph::synth {

/// Random-typing generator (approximate). Each edge is typed on a 2-D
/// keyboard of `keys` equiprobable characters plus a space. Every keystroke
/// hits the space-space cell with probability `q`, which ends both labels;
/// otherwise it picks a character cell (a, b), diagonal cells weighted 1 and
/// off-diagonal cells `beta`, and appends a to the source label and b to the
/// target label. Both labels therefore have the same length. Distinct labels
/// are nodes; self-loops are discarded.
struct RtgParams {
  std::uint64_t words = 5000;  // edges typed
  int keys = 5;
  double beta = 0.6;
  double q = 0.4;
  std::uint64_t seed = 1;

  void validate() const;
};

MultiGraph random_typing_graph(const RtgParams& params);

}  // namespace newsgraph::synth
