#include "newsgraph/protocol/scenario.hpp"

#include "json.hpp"
#include "newsgraph/core/io.hpp"
#include "newsgraph/sbsvd/factor_io.hpp"
#include "newsgraph/synth/bundle.hpp"

namespace newsgraph::protocol {

using json = nlohmann::ordered_json;

namespace {

Tokens tokens(const json& j) { return Fixed::quantize(j.get<double>()); }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

JudgeConfig parse_config(const json& j) {
  JudgeConfig c;
  if (j.contains("lambda")) c.lambda = Fixed::quantize(j["lambda"].get<double>());
  if (j.contains("deadline_ticks")) c.deadline_ticks = j["deadline_ticks"].get<std::uint64_t>();
  if (j.contains("solver_bond")) c.solver_bond = tokens(j["solver_bond"]);
  if (j.contains("attester_bond")) c.attester_bond = tokens(j["attester_bond"]);
  c.verifier_deposit = j.contains("verifier_deposit") ? tokens(j["verifier_deposit"])
                                                      : Fixed::from_raw(c.solver_bond.raw() / 2);
  if (j.contains("free_challenge_slots")) c.free_challenge_slots = j["free_challenge_slots"].get<int>();
  if (j.contains("reward_window_ticks")) {
    c.reward_window_ticks = j["reward_window_ticks"].get<std::uint64_t>();
  }
  if (j.contains("max_repeats")) c.max_repeats = j["max_repeats"].get<int>();
  if (j.contains("reward_pool")) c.reward_pool = tokens(j["reward_pool"]);
  if (j.contains("min_votes")) c.min_votes = j["min_votes"].get<std::size_t>();
  if (j.contains("min_attesters")) c.min_attesters = j["min_attesters"].get<std::size_t>();
  return c;
}

void load_dataset(const json& j, const std::filesystem::path& base, CycleSetup& setup) {
  if (j.contains("dir")) {
    auto bundle = synth::read_bundle(resolve(base, j["dir"].get<std::string>()));
    setup.votes = std::move(bundle.votes);
    setup.stakes.assign(bundle.stakes.stakes().begin(), bundle.stakes.stakes().end());
    return;
  }
  auto config = synth::preset(j.value("preset", std::string("desk")));
  config.noise_variance = j.value("noise_variance", 0.0);
  config.adversary_proportion = j.value("ap", 0.0);
  config.adversary_stake = Fixed::quantize(j.value("as", 5.0));
  config.seed = j.value("seed", std::uint64_t{1});
  const auto data = synth::generate_dataset(config);
  setup.votes = data.votes;
  setup.stakes.assign(data.stakes.stakes().begin(), data.stakes.stakes().end());
}

}  // namespace

CycleSetup parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  CycleSetup setup;
  try {
    const json j = json::parse(text);
    setup.seed = j.value("seed", std::uint64_t{1});
    setup.cycle = j.value("cycle", std::uint64_t{0});
    if (j.contains("config")) setup.judge = parse_config(j["config"]);
    if (!j.contains("dataset")) throw ScenarioError("scenario has no dataset");
    load_dataset(j["dataset"], base_dir, setup);

    if (j.contains("training")) {
      const auto& t = j["training"];
      setup.training.k = t.value("k", setup.training.k);
      setup.training.beta = t.value("beta", setup.training.beta);
      setup.training.gamma = t.value("gamma", setup.training.gamma);
      setup.training.epochs = t.value("epochs", setup.training.epochs);
      setup.training.seed = t.value("seed", setup.training.seed);
    }
    setup.training.validate();

    for (const auto& s : j.value("solvers", json::array())) {
      SolverScript script;
      script.kind = parse_solver_kind(s.value("behavior", std::string("honest")));
      script.row = s.value("row", std::size_t{0});
      script.col = s.value("col", std::size_t{0});
      script.delta = Fixed::from_raw(s.value("delta_raw", std::int64_t{-1}));
      if (s.contains("factors")) {
        const auto& f = s["factors"];
        script.external = LatentFactors{
            sbsvd::read_factors(resolve(base_dir, f.at("users").get<std::string>())),
            sbsvd::read_factors(resolve(base_dir, f.at("edges").get<std::string>()))};
      }
      setup.solvers.emplace_back(s.at("id").get<std::string>(), std::move(script));
    }
    for (const auto& a : j.value("attesters", json::array())) {
      setup.attesters.emplace_back(
          a.at("id").get<std::string>(),
          AttesterScript{parse_attester_kind(a.value("behavior", std::string("honest")))});
    }
    for (const auto& v : j.value("validators", json::array())) {
      setup.validators.emplace_back(
          v.at("id").get<std::string>(),
          ValidatorScript{parse_validator_kind(v.value("behavior", std::string("honest")))});
    }
    for (const auto& s : j.value("stakers", json::array())) {
      const auto user = s.at("user").get<std::size_t>();
      if (user >= setup.votes.num_users()) throw ScenarioError("staker index out of range");
      setup.stakers[user] = StakerScript{parse_staker_kind(s.value("behavior", std::string("honest")))};
    }
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  } catch (const ProtocolError& e) {
    throw ScenarioError(e.what());
  }
  return setup;
}

CycleSetup load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path), path.parent_path());
}

std::string report_to_json(const CycleReport& r, bool with_transcript) {
  json j;
  j["cycle"] = r.cycle;
  j["round"] = r.round;
  j["outcome"] = to_string(r.outcome);
  j["winner"] = r.winner ? json(*r.winner) : json(nullptr);
  j["winner_rsbe_raw"] = r.winner_rsbe.raw();
  j["cycle_users"] = r.cycle_users;
  j["cycle_edges"] = r.cycle_edges;
  j["excluded"] = r.excluded;
  json challenges = json::array();
  for (const auto& c : r.challenges) {
    challenges.push_back({{"id", c.id},
                          {"kind", to_string(c.kind)},
                          {"round", c.round},
                          {"challenger", c.challenger},
                          {"defendant", c.defendant},
                          {"verdict", c.upheld ? "upheld" : "dismissed"},
                          {"traverse_rounds", c.traverse_rounds},
                          {"prover_bytes", c.prover_bytes},
                          {"detail", c.detail}});
  }
  j["challenges"] = challenges;
  json claims = json::object();
  for (const auto& [account, status] : r.claims) claims[account] = to_string(status);
  j["claims"] = claims;
  json rewards = json::object();
  for (const auto& [account, amount] : r.rewards) rewards[account] = amount.raw();
  j["rewards_raw"] = rewards;
  j["punished"] = r.punished;
  j["minted_raw"] = r.minted.raw();
  j["total_supply_raw"] = r.total_supply.raw();
  j["conserved"] = r.conserved;
  j["ticks"] = r.ticks;
  if (with_transcript) j["transcript"] = r.transcript;
  return j.dump(2) + "\n";
}

}  // namespace newsgraph::protocol
