#pragma once

#include <filesystem>
#include <string>

#include "newsgraph/protocol/cycle.hpp"

namespace newsgraph::protocol {

class ScenarioError : public Error {
 public:
  using Error::Error;
};

/// Builds a cycle from a JSON scenario:
///   seed, cycle            integers
///   config                 judge parameters; token amounts in whole tokens
///   dataset                {"preset", "noise_variance", "ap", "as", "seed"} or {"dir"}
///   training               {"k", "beta", "gamma", "epochs", "seed"}
///   solvers                [{"id", "behavior", "row", "col", "delta_raw",
///                            "factors": {"users", "edges"}}]
///   attesters, validators  [{"id", "behavior"}]
///   stakers                [{"user", "behavior"}]
/// Relative paths resolve against `base_dir`. Throws ScenarioError for
/// malformed input or an unknown behavior name.
CycleSetup parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
CycleSetup load_scenario(const std::filesystem::path& path);

std::string report_to_json(const CycleReport& report, bool with_transcript = false);

}  // namespace newsgraph::protocol
