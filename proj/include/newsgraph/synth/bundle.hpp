#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "newsgraph/synth/votes.hpp"

namespace newsgraph::synth {

/// What experiments need from a dataset, as stored on disk.
struct Bundle {
  VoteMatrix votes;
  StakeLedger stakes;
  std::vector<bool> adversary;
  double noise_variance = 0.0;
  double adversary_proportion = 0.0;
  Fixed adversary_stake;
  std::uint64_t seed = 0;
};

Bundle to_bundle(const Dataset& d);

/// graph.csv, votes.csv, stakes.csv and truth.json.
void write_bundle(const std::filesystem::path& dir, const Dataset& d);
/// Throws FormatError when a file is missing or malformed.
Bundle read_bundle(const std::filesystem::path& dir);

}  // namespace newsgraph::synth
