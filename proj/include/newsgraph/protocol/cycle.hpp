#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "newsgraph/protocol/actors.hpp"
#include "newsgraph/sbsvd/sbsvd.hpp"

namespace newsgraph::protocol {

struct CycleSetup {
  JudgeConfig judge;
  std::uint64_t cycle = 0;
  std::uint64_t seed = 1;

  VoteMatrix votes;           // voting-phase matrix over registered users
  std::vector<Fixed> stakes;  // desired stake per registered user
  sbsvd::HyperParams training;
  /// When set, solvers skip training and commit to these factors, given over
  /// the voting-phase matrix and restricted to the cycle's users and edges.
  std::optional<LatentFactors> factors;

  std::vector<std::pair<ActorId, SolverScript>> solvers;
  std::vector<std::pair<ActorId, AttesterScript>> attesters;
  std::vector<std::pair<ActorId, ValidatorScript>> validators;
  std::map<std::size_t, StakerScript> stakers;  // registered user -> script; default honest

  std::size_t max_steps = 100000;  // cap on scheduler steps per challenge window
};

enum class CycleOutcome { Completed, NoStakers, NoSolutions, RepeatLimit };
const char* to_string(CycleOutcome o);

struct CycleReport {
  std::uint64_t cycle = 0;
  std::uint64_t round = 0;
  CycleOutcome outcome = CycleOutcome::Completed;
  std::optional<ActorId> winner;
  Fixed winner_rsbe;
  std::size_t cycle_users = 0;
  std::size_t cycle_edges = 0;
  std::vector<std::string> excluded;  // accounts whose stake reveal failed
  std::vector<ChallengeRecord> challenges;
  std::map<ActorId, ClaimOutcome> claims;
  std::map<ActorId, Tokens> rewards;
  std::set<ActorId> punished;
  std::map<std::string, Tokens> balances;
  Tokens minted;
  Tokens total_supply;
  bool conserved = false;
  std::uint64_t ticks = 0;
  std::vector<std::string> transcript;

  friend bool operator==(const CycleReport&, const CycleReport&) = default;
};

/// Account name of registered user `i`.
std::string user_account_name(std::size_t i);

/// Runs one cycle: commit-reveal staking, then rounds of solution
/// submission, winner appointment, attestation and challenges, repeated
/// while challenges are upheld, then reward claims and payout.
CycleReport run_cycle(const CycleSetup& setup);

}  // namespace newsgraph::protocol
