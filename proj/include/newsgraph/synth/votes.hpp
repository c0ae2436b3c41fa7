#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "newsgraph/core/matrix.hpp"
#include "newsgraph/core/model.hpp"
#include "newsgraph/synth/graph.hpp"
#include "newsgraph/synth/rtg.hpp"

namespace newsgraph::synth {

/// Where the news multigraph comes from. A file is read as an edge list; the
/// generator is run otherwise. Either way the largest component is kept and,
/// for generated graphs with non-zero targets, trimmed to exact counts.
struct GraphSource {
  std::optional<std::filesystem::path> file;
  RtgParams generator;
  std::size_t nodes = 0;
  std::size_t simple_edges = 0;
  std::size_t multi_edges = 0;
};

IndexedGraph load_or_generate_graph(const GraphSource& source);
std::filesystem::path reference_graph_path();

struct SynthConfig {
  GraphSource graph;
  int latent_rank = 10;
  double noise_variance = 0.0;        // sigma_v^2
  double adversary_proportion = 0.0;  // ap
  Fixed adversary_stake = Fixed::from_int(5);
  Fixed honest_stake = Fixed::from_int(5);
  double mean_votes = 20.0;
  std::uint64_t seed = 1;

  /// Throws DomainError for ap outside [0, 1), stakes outside (0, 5], an
  /// expected adversary share of the stake above one half, or mean_votes
  /// below the ten-vote minimum.
  void validate() const;
};

/// Built-in configurations: "paper" (the shipped reference graph) and
/// "desk" (a small generated graph). Throws DomainError for other names.
SynthConfig preset(std::string_view name);

/// The noiseless low-rank votes L = A B^T / max|A B^T| and who is an adversary.
struct GroundTruth {
  std::vector<bool> adversary;
  RealMatrix a;  // users x rank
  RealMatrix b;  // simple edges x rank
  double max_abs = 1.0;

  double low_rank(std::size_t user, std::size_t simple_edge) const;
  std::size_t num_adversaries() const;
};

struct Dataset {
  SynthConfig config;
  IndexedGraph graph;
  VoteMatrix votes;                        // only edges that received a vote
  std::vector<std::uint32_t> edge_origin;  // vote-matrix edge -> simple edge
  StakeLedger stakes;
  GroundTruth truth;
  std::vector<std::size_t> assigned;       // multigraph edges handed to each user
};

/// |U| = ceil(|R| / mean_votes).
std::size_t user_count(std::size_t multi_edges, double mean_votes);

Dataset generate_dataset(const SynthConfig& config, const IndexedGraph& graph);
Dataset generate_dataset(const SynthConfig& config);

}  // namespace newsgraph::synth
