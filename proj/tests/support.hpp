#pragma once

// Shared fixtures for the protocol tests and the acceptance runner.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "newsgraph/core/rng.hpp"
#include "newsgraph/protocol/cycle.hpp"

namespace newsgraph::testing {

/// A judge driven by hand up to an appointed winner, with one solver and a
/// pool of funded verifiers. Used to play error-matrix games directly.
struct Arena {
  protocol::CycleSetup setup;
  protocol::Judge judge;
  protocol::Board board;
  protocol::SolverActor solver;
  std::vector<protocol::ActorId> verifiers;

  Arena(protocol::CycleSetup s, protocol::SolverScript script, std::size_t num_verifiers,
        std::size_t deposits_each = 1, bool appoint = true)
      : setup(std::move(s)), judge(setup.judge, setup.cycle, setup.seed),
        solver("solver", std::move(script)) {
    auto& ledger = judge.ledger();
    judge.register_actor(solver.id(), protocol::actor_key(setup.seed, solver.id()));
    ledger.mint(solver.id(), setup.judge.solver_bond);
    for (std::size_t v = 0; v < num_verifiers; ++v) {
      verifiers.push_back("verifier/" + std::to_string(v));
      judge.register_actor(verifiers.back(), protocol::actor_key(setup.seed, verifiers.back()));
      ledger.mint(verifiers.back(),
                  Tokens::from_int(static_cast<std::int64_t>(deposits_each)) *
                      setup.judge.verifier_deposit);
    }

    const std::size_t n = setup.votes.num_users();
    std::vector<protocol::ActorId> accounts;
    std::vector<protocol::StakerActor> stakers;
    for (std::size_t i = 0; i < n; ++i) {
      accounts.push_back(protocol::user_account_name(i));
      ledger.mint(accounts.back(), StakeLedger::max_stake());
      stakers.emplace_back(i, accounts.back(), setup.stakes[i], protocol::StakerScript{},
                           derive_seed(setup.seed, "staker", i));
    }
    judge.set_votes(setup.votes, accounts);
    for (auto& st : stakers) st.commit(judge);
    judge.advance(1);
    for (auto& st : stakers) st.reveal(judge);
    judge.advance(1);
    judge.close_stake_reveal();

    judge.post_solver_bond(solver.id());
    submitted = solver.submit(judge, board, *setup.factors);
    judge.advance(1);
    if (appoint) judge.appoint_winner();
  }

  bool submitted = false;

  /// Honest reference tree of the winner's error matrix.
  std::shared_ptr<const ssamt::Tree> reference() { return board.em_tree(judge, solver.id()); }
};

/// Verifier policy for one open game: returns the side to select this tick,
/// or nothing to wait.
using VerifierPolicy =
    std::function<std::optional<protocol::Side>(const protocol::BranchTraverse<ssamt::Node>&)>;

/// Runs the scheduler until every game in `sessions` has settled: each tick
/// the solver answers, then every verifier whose game awaits a selection
/// consults its policy; then the clock advances and deadlines are enforced.
inline void play(Arena& arena, const std::vector<std::uint64_t>& sessions,
                 const std::vector<VerifierPolicy>& policies, std::size_t max_ticks = 100000) {
  auto& judge = arena.judge;
  for (std::size_t tick = 0; tick < max_ticks; ++tick) {
    bool open = false;
    for (auto id : sessions) open = open || !judge.challenge(id).settled;
    if (!open) return;
    arena.solver.act(judge);
    for (std::size_t g = 0; g < sessions.size(); ++g) {
      const auto id = sessions[g];
      if (judge.challenge(id).settled) continue;
      const auto* game = judge.em_session(id);
      if (game->phase() != protocol::Phase::AwaitingSelection) continue;
      if (auto side = policies[g](*game)) {
        judge.traverse_select(id, judge.challenge(id).challenger, *side);
      }
    }
    judge.advance(1);
    judge.expire();
  }
  throw protocol::ProtocolError("games did not settle");
}

}  // namespace newsgraph::testing
