#include "newsgraph/protocol/cycle.hpp"

#include <algorithm>

namespace newsgraph::protocol {

const char* to_string(CycleOutcome o) {
  switch (o) {
    case CycleOutcome::Completed: return "completed";
    case CycleOutcome::NoStakers: return "aborted: no stakers";
    case CycleOutcome::NoSolutions: return "aborted: no solutions";
    case CycleOutcome::RepeatLimit: return "aborted: repeat limit";
  }
  return "?";
}

std::string user_account_name(std::size_t i) { return "user/" + std::to_string(i); }

namespace {

template <typename F>
void try_move(F&& f) {
  try {
    f();
  } catch (const DomainError&) {
    // insufficient funds: the actor sits the move out
  } catch (const ProtocolError&) {
    // move not admissible now
  }
}

template <typename Index>
FixedMatrix select_rows(const FixedMatrix& m, const std::vector<Index>& rows) {
  FixedMatrix out(rows.size(), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= m.rows()) throw DimensionMismatch("factor matrix has too few rows");
    std::copy_n(m.row(rows[r]).begin(), m.cols(), out.row(r).begin());
  }
  return out;
}

}  // namespace

CycleReport run_cycle(const CycleSetup& setup) {
  const JudgeConfig& cfg = setup.judge;
  Judge judge(cfg, setup.cycle, setup.seed);
  Board board;

  std::vector<SolverActor> solvers;
  std::vector<AttesterActor> attesters;
  std::vector<ValidatorActor> validators;
  std::vector<StakerActor> stakers;

  StakeLedger& ledger = judge.ledger();
  ledger.mint(Judge::pool_account(), cfg.reward_pool);
  for (const auto& [id, script] : setup.solvers) {
    judge.register_actor(id, actor_key(setup.seed, id));
    ledger.mint(id, cfg.solver_bond);
    solvers.emplace_back(id, script);
  }
  for (const auto& [id, script] : setup.attesters) {
    judge.register_actor(id, actor_key(setup.seed, id));
    ledger.mint(id, cfg.attester_bond);
    attesters.emplace_back(id, script, actor_key(setup.seed, id),
                           derive_seed(setup.seed, "attester/" + id));
  }
  for (const auto& [id, script] : setup.validators) {
    judge.register_actor(id, actor_key(setup.seed, id));
    ledger.mint(id, Tokens::from_int(8) * cfg.verifier_deposit);
    validators.emplace_back(id, script, derive_seed(setup.seed, "validator/" + id));
  }

  // voting phase: stakers commit
  const std::size_t n = setup.votes.num_users();
  if (setup.stakes.size() != n) throw DimensionMismatch("one stake per registered user required");
  std::vector<ActorId> accounts;
  for (std::size_t i = 0; i < n; ++i) {
    accounts.push_back(user_account_name(i));
    ledger.mint(accounts.back(), StakeLedger::max_stake());
    auto it = setup.stakers.find(i);
    stakers.emplace_back(i, accounts.back(), setup.stakes[i],
                         it == setup.stakers.end() ? StakerScript{} : it->second,
                         derive_seed(setup.seed, "staker", i));
  }
  judge.set_votes(setup.votes, accounts);
  for (auto& s : stakers) s.commit(judge);
  judge.advance(1);

  // staking
  CycleReport report;
  for (auto& s : stakers) {
    const auto outcome = s.reveal(judge);
    if (outcome != RevealOutcome::Locked) report.excluded.push_back(s.account());
  }
  judge.advance(1);
  judge.close_stake_reveal();
  report.cycle_users = judge.cycle_votes().num_users();
  report.cycle_edges = judge.cycle_votes().num_edges();

  CycleOutcome outcome = CycleOutcome::Completed;
  if (report.cycle_users == 0) outcome = CycleOutcome::NoStakers;

  std::optional<LatentFactors> trained;
  if (setup.factors && outcome == CycleOutcome::Completed) {
    trained = LatentFactors{select_rows(setup.factors->users, judge.cycle_users()),
                            select_rows(setup.factors->edges, judge.cycle_edges())};
  }
  if (outcome == CycleOutcome::Completed && !trained) {
    try {
      trained = sbsvd::train(judge.cycle_votes(), judge.cycle_stakes(), setup.training, cfg.lambda)
                    .factors;
    } catch (const DivergenceError&) {
      trained.reset();
    }
  }

  while (outcome == CycleOutcome::Completed) {
    // bonds, solutions, winner
    for (auto& a : attesters) try_move([&] { judge.post_attester_bond(a.id()); });
    board.clear();
    for (auto& s : solvers) {
      try_move([&] {
        judge.post_solver_bond(s.id());
        if (trained || s.script().external) s.submit(judge, board, trained ? *trained : LatentFactors{});
      });
    }
    judge.advance(1);
    if (!judge.appoint_winner()) {
      outcome = CycleOutcome::NoSolutions;
      break;
    }

    // attestation
    const auto selected = judge.select_attesters();
    for (auto& a : attesters) {
      a.reset();
      if (std::find(selected.begin(), selected.end(), a.id()) != selected.end()) {
        try_move([&] { a.attest(judge, board); });
      }
    }
    judge.advance(cfg.deadline_ticks + 1);
    judge.expire();

    // challenges
    for (auto& v : validators) try_move([&] { v.inspect(judge, board); });
    for (std::size_t step = 0; !judge.all_settled(); ++step) {
      if (step >= setup.max_steps) throw ProtocolError("challenge window did not settle");
      for (auto& s : solvers) s.act(judge);
      for (auto& a : attesters) a.act(judge);
      for (auto& v : validators) v.act(judge, board);
      judge.advance(1);
      judge.expire();
    }
    if (!judge.finish_round()) break;
    if (judge.round() > static_cast<std::uint64_t>(cfg.max_repeats)) {
      outcome = CycleOutcome::RepeatLimit;
    }
  }

  // rewards
  if (outcome == CycleOutcome::Completed) {
    report.winner = judge.winner()->solver;
    report.winner_rsbe = judge.winner()->claimed_rsbe;
    for (auto& s : stakers) {
      if (auto verdict = s.claim(judge, board)) report.claims[s.account()] = *verdict;
    }
    judge.advance(1);
    for (auto& v : validators) v.audit_claims(judge, board);
    judge.pay_rewards();
    judge.advance(cfg.reward_window_ticks + 1);
    judge.pay_rewards();
    for (const auto& [user, claim] : judge.claims()) {
      report.claims[judge.user_account(user)] = claim.status;
      if (claim.paid != Tokens{}) report.rewards[judge.user_account(user)] = claim.paid;
    }
  }
  judge.close_cycle();

  report.cycle = setup.cycle;
  report.round = judge.round();
  report.outcome = outcome;
  report.challenges = judge.challenges();
  report.punished = judge.punished();
  report.balances = ledger.accounts();
  report.minted = ledger.minted();
  report.total_supply = ledger.total_supply();
  report.conserved = report.minted == report.total_supply;
  report.ticks = judge.now();
  report.transcript = judge.log();
  return report;
}

}  // namespace newsgraph::protocol
