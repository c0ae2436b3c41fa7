#include "newsgraph/synth/bundle.hpp"

#include <fstream>

#include "json.hpp"
#include "newsgraph/core/errors.hpp"
#include "newsgraph/core/io.hpp"

namespace newsgraph::synth {

using json = nlohmann::ordered_json;

Bundle to_bundle(const Dataset& d) {
  Bundle b;
  b.votes = d.votes;
  b.stakes = d.stakes;
  b.adversary = d.truth.adversary;
  b.noise_variance = d.config.noise_variance;
  b.adversary_proportion = d.config.adversary_proportion;
  b.adversary_stake = d.config.adversary_stake;
  b.seed = d.config.seed;
  return b;
}

void write_bundle(const std::filesystem::path& dir, const Dataset& d) {
  std::filesystem::create_directories(dir);
  write_edge_list(dir / "graph.csv", d.graph.graph);
  write_votes(dir / "votes.csv", d.votes);
  write_stakes(dir / "stakes.csv", d.stakes);

  json truth;
  truth["seed"] = d.config.seed;
  truth["noise_variance"] = d.config.noise_variance;
  truth["adversary_proportion"] = d.config.adversary_proportion;
  truth["adversary_stake_raw"] = d.config.adversary_stake.raw();
  truth["honest_stake_raw"] = d.config.honest_stake.raw();
  truth["mean_votes"] = d.config.mean_votes;
  truth["latent_rank"] = d.config.latent_rank;
  truth["nodes"] = d.graph.num_nodes();
  truth["multi_edges"] = d.graph.num_multi_edges();
  truth["simple_edges"] = d.graph.num_simple_edges();
  truth["users"] = d.votes.num_users();
  truth["voted_edges"] = d.votes.num_edges();
  truth["votes"] = d.votes.num_votes();
  truth["low_rank_max_abs"] = d.truth.max_abs;
  std::vector<int> flags(d.truth.adversary.begin(), d.truth.adversary.end());
  truth["adversary"] = flags;
  truth["edge_origin"] = d.edge_origin;
  write_text_file(dir / "truth.json", truth.dump(1) + "\n");
}

Bundle read_bundle(const std::filesystem::path& dir) {
  for (const char* name : {"votes.csv", "stakes.csv", "truth.json"}) {
    if (!std::filesystem::exists(dir / name)) {
      throw FormatError("dataset bundle " + dir.string() + " lacks " + name);
    }
  }
  Bundle b;
  b.votes = read_votes(dir / "votes.csv");
  b.stakes = read_stakes(dir / "stakes.csv", b.votes.num_users());
  try {
    const auto truth = json::parse(read_text_file(dir / "truth.json"));
    b.seed = truth.at("seed").get<std::uint64_t>();
    b.noise_variance = truth.at("noise_variance").get<double>();
    b.adversary_proportion = truth.at("adversary_proportion").get<double>();
    b.adversary_stake = Fixed::from_raw(truth.at("adversary_stake_raw").get<std::int64_t>());
    for (int flag : truth.at("adversary").get<std::vector<int>>()) b.adversary.push_back(flag != 0);
  } catch (const json::exception& e) {
    throw FormatError("truth.json: " + std::string(e.what()));
  }
  if (b.adversary.size() != b.votes.num_users()) {
    throw FormatError("truth.json: adversary flags do not match the user count");
  }
  return b;
}

}  // namespace newsgraph::synth
