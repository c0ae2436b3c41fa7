#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "newsgraph/core/hash.hpp"
#include "newsgraph/eval/cost.hpp"
#include "newsgraph/protocol/scenario.hpp"
#include "support.hpp"

using namespace newsgraph;
using namespace newsgraph::protocol;

namespace {

Hash32 filled(std::uint8_t seed) {
  Hash32 h{};
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = static_cast<std::uint8_t>(seed + i);
  return h;
}

CycleSetup small_cycle(std::uint64_t seed, std::size_t users = 12, std::size_t edges = 12) {
  auto setup = eval::random_fraud_instance(users, edges, 3, seed);
  setup.judge.min_votes = 1;
  setup.solvers = {{"solver", {}}};
  setup.attesters = {{"att/a", {}}, {"att/b", {}}, {"att/c", {}}};
  setup.validators = {{"val", {}}};
  return setup;
}

const ChallengeRecord* find_challenge(const CycleReport& r, ChallengeKind kind,
                                      const std::string& defendant) {
  for (const auto& c : r.challenges) {
    if (c.kind == kind && c.defendant == defendant) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_SUITE("protocol") {

TEST_CASE("commit hash, public parameter and signature layouts") {
  const Hash32 secret = filled(7);
  const Fixed value = Fixed::quantize(2.5);
  std::vector<std::uint8_t> buf(8);
  put_be64(buf.data(), static_cast<std::uint64_t>(value.raw()));
  buf.insert(buf.end(), secret.begin(), secret.end());
  CHECK(stake_commit_hash(value, secret) == sha256(Bytes(buf)));

  std::vector<std::uint8_t> p(64, 0);
  put_be64(p.data() + 24, 5);
  put_be64(p.data() + 56, 2);
  CHECK(public_parameter(5, 2) == sha256(Bytes(p)));
  CHECK(public_parameter(5, 2) != public_parameter(2, 5));

  const Hash32 key = filled(1), msg = filled(100);
  std::vector<std::uint8_t> s(key.begin(), key.end());
  s.insert(s.end(), msg.begin(), msg.end());
  CHECK(sign(key, msg) == sha256(Bytes(s)));
  CHECK(actor_key(1, "a") == actor_key(1, "a"));
  CHECK(actor_key(1, "a") != actor_key(2, "a"));
}

TEST_CASE("branch traverse over a Merkle tree") {
  const Hash32 l0 = filled(1), l1 = filled(2), l2 = filled(3), l3 = filled(4);
  const Hash32 a = ssamt::merkle_parent(l0, l1), b = ssamt::merkle_parent(l2, l3);
  const Hash32 root = ssamt::merkle_parent(a, b);

  SUBCASE("honest walk reaches the chosen leaf") {
    BranchTraverse<Hash32> g("p", "v", root, 2, 0, 16);
    CHECK(g.submit_children("p", a, b, 1));
    g.select("v", Side::Right, 2);
    CHECK(g.submit_children("p", l2, l3, 3));
    g.select("v", Side::Left, 4);
    CHECK(g.phase() == Phase::AtLeaf);
    CHECK(g.current() == l2);
    CHECK(g.position() == 2);
    CHECK(g.rounds() == 2);
    CHECK(g.prover_bytes() == 4 * 32);
    CHECK(g.verifier_bytes() == 2);
  }
  SUBCASE("inconsistent children lose for the prover") {
    BranchTraverse<Hash32> g("p", "v", root, 2, 0, 16);
    CHECK_FALSE(g.submit_children("p", b, a, 1));
    CHECK(g.phase() == Phase::Settled);
    CHECK(g.winner() == Party::Verifier);
  }
  SUBCASE("timeouts settle against the party due to move") {
    BranchTraverse<Hash32> g("p", "v", root, 2, 0, 16);
    CHECK_FALSE(g.expire(16));
    CHECK(g.expire(17));
    CHECK(g.winner() == Party::Verifier);

    BranchTraverse<Hash32> h("p", "v", root, 2, 0, 16);
    h.submit_children("p", a, b, 3);
    CHECK_FALSE(h.expire(19));
    CHECK(h.expire(20));
    CHECK(h.winner() == Party::Prover);
  }
  SUBCASE("illegal moves throw") {
    BranchTraverse<Hash32> g("p", "v", root, 2, 0, 16);
    CHECK_THROWS_AS(g.select("v", Side::Left, 1), ProtocolError);
    CHECK_THROWS_AS(g.submit_children("v", a, b, 1), ProtocolError);
    CHECK_THROWS_AS(g.submit_children("p", a, b, 17), ProtocolError);
    g.submit_children("p", a, b, 1);
    CHECK_THROWS_AS(g.select("p", Side::Left, 2), ProtocolError);
    CHECK_THROWS_AS(g.submit_children("p", a, b, 2), ProtocolError);
    CHECK_THROWS_AS((BranchTraverse<Hash32>("p", "v", root, 0, 0, 16)), ProtocolError);
  }
}

TEST_CASE("winner is the lowest claim, then the earliest tick, then the smallest id") {
  CHECK_THROWS_AS(select_winner({}), ProtocolError);
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SolutionCommitment> cs(1 + rng.below(6));
    for (std::size_t i = 0; i < cs.size(); ++i) {
      cs[i].solver = "s" + std::to_string(rng.below(4)) + "/" + std::to_string(i);
      cs[i].claimed_rsbe = Fixed::from_raw(static_cast<std::int64_t>(rng.below(3)));
      cs[i].submit_tick = rng.below(3);
    }
    const auto best = std::min_element(cs.begin(), cs.end(), [](const auto& x, const auto& y) {
      return std::tie(x.claimed_rsbe, x.submit_tick, x.solver) <
             std::tie(y.claimed_rsbe, y.submit_tick, y.solver);
    });
    CHECK(select_winner(cs) == best->solver);
  }
}

TEST_CASE("stake reveal outcomes") {
  Judge judge({}, 0, 1);
  VoteMatrix votes(3, 2, {{0, 0, vote_from_int(1)}, {1, 1, vote_from_int(-1)}, {2, 0, vote_from_int(0)}});
  std::vector<ActorId> accounts{"u0", "u1", "u2"};
  for (const auto& a : accounts) judge.ledger().mint(a, StakeLedger::max_stake());
  judge.set_votes(votes, accounts);
  const Hash32 secret = filled(9);
  judge.commit_stake(0, stake_commit_hash(Fixed::from_int(2), secret));
  judge.commit_stake(1, stake_commit_hash(Fixed::from_int(2), secret));
  judge.commit_stake(2, stake_commit_hash(Fixed::from_int(6), secret));

  CHECK(judge.reveal_stake(0, Fixed::from_int(2), secret) == RevealOutcome::Locked);
  CHECK(judge.reveal_stake(1, Fixed::from_int(3), secret) == RevealOutcome::HashMismatch);
  CHECK(judge.reveal_stake(2, Fixed::from_int(6), secret) == RevealOutcome::InvalidValue);
  CHECK(judge.ledger().balance("u1") == StakeLedger::max_stake());

  Judge other({}, 0, 1);
  other.set_votes(votes, accounts);
  CHECK_THROWS_AS(other.reveal_stake(0, Fixed::from_int(1), secret), ProtocolError);

  judge.close_stake_reveal();
  CHECK(judge.cycle_votes().num_users() == 1);
  CHECK(judge.cycle_users() == std::vector<std::size_t>{0});
  CHECK(judge.cycle_stakes().stake(0) == Fixed::from_int(2));
}

TEST_CASE("solutions whose claims disagree with their roots are refused") {
  auto setup = small_cycle(5);
  testing::Arena arena(setup, {}, 0, 1, false);
  REQUIRE(arena.submitted);
  auto& judge = arena.judge;
  judge.register_actor("other", actor_key(1, "other"));
  judge.ledger().mint("other", setup.judge.solver_bond);
  judge.post_solver_bond("other");

  SolutionCommitment c = *arena.solver.commitment();
  c.solver = "other";
  std::string why;

  auto lowered = c;
  lowered.claimed_rsbe = Fixed::from_raw(c.claimed_rsbe.raw() - 1);
  CHECK_FALSE(judge.submit_solution(lowered, &why));
  CHECK_FALSE(why.empty());

  auto frob = c;
  frob.claimed_frob_u = Fixed::from_raw(c.claimed_frob_u.raw() + 1);
  CHECK_FALSE(judge.submit_solution(frob));

  auto no_rank = c;
  no_rank.k = 0;
  CHECK_FALSE(judge.submit_solution(no_rank));

  CHECK(judge.submit_solution(c));
  CHECK_FALSE(judge.submit_solution(c));
}

TEST_CASE("an all-honest cycle completes in one round and conserves tokens") {
  const auto r = run_cycle(small_cycle(11));
  CHECK(r.outcome == CycleOutcome::Completed);
  CHECK(r.round == 0);
  CHECK(r.winner == ActorId("solver"));
  CHECK(r.punished.empty());
  CHECK(r.excluded.empty());
  CHECK(r.conserved);
  CHECK(r.challenges.empty());
  CHECK(r.rewards.size() == 12);
  // every bond and stake is back with its owner
  CHECK(r.balances.at("solver") == Fixed::from_int(100));
  for (const auto& [name, amount] : r.balances) {
    if (name.starts_with("att/")) CHECK(amount == Fixed::from_int(50));
  }
}

TEST_CASE("rewards follow votes over normalized row error") {
  auto setup = small_cycle(17);
  const auto r = run_cycle(setup);
  REQUIRE(r.outcome == CycleOutcome::Completed);
  const auto& f = *setup.factors;
  std::vector<double> weight(setup.votes.num_users(), 0.0);
  for (std::size_t i = 0; i < weight.size(); ++i) {
    double dev2 = 0.0;
    for (std::size_t j = 0; j < setup.votes.num_edges(); ++j) {
      const auto v = setup.votes.at(i, j);
      if (!v) continue;
      double pred = 0.0;
      for (std::size_t t = 0; t < f.k(); ++t) pred += f.users(i, t).to_double() * f.edges(j, t).to_double();
      dev2 += std::pow(to_int(*v) - pred, 2);
    }
    weight[i] = static_cast<double>(setup.votes.votes_of(i)) / dev2;
  }
  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
  double paid = 0.0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const double got = r.rewards.at(user_account_name(i)).to_double();
    paid += got;
    CHECK(got == doctest::Approx(1000.0 * weight[i] / total).epsilon(1e-6));
  }
  CHECK(paid <= 1000.0);
  CHECK(paid == doctest::Approx(1000.0).epsilon(1e-6));
}

TEST_CASE("a corrupted error-matrix cell is caught and the evaluation repeats") {
  auto setup = small_cycle(21, 16, 16);
  SolverScript bad;
  bad.kind = SolverScript::Kind::CorruptEmCell;
  bad.row = 3;
  bad.col = 9;
  setup.solvers = {{"bad", bad}, {"good", {}}};
  const auto r = run_cycle(setup);
  CHECK(r.outcome == CycleOutcome::Completed);
  CHECK(r.round == 1);
  CHECK(r.winner == ActorId("good"));
  CHECK(r.punished.contains("bad"));
  const auto* c = find_challenge(r, ChallengeKind::ErrorMatrix, "bad");
  REQUIRE(c != nullptr);
  CHECK(c->upheld);
  CHECK(c->traverse_rounds == ssamt::Shape{16, 16}.depth());
  CHECK(c->position == 3 * 16 + 9);
  CHECK(r.conserved);
}

TEST_CASE("faulty attesters are punished") {
  struct Case {
    AttesterScript::Kind kind;
    ValidatorScript::Kind validator;
    ChallengeKind expected;
  };
  const Case cases[] = {
      {AttesterScript::Kind::WithholdData, ValidatorScript::Kind::Blind, ChallengeKind::FreeChallenge},
      {AttesterScript::Kind::WrongSalt, ValidatorScript::Kind::Honest, ChallengeKind::Salt},
      {AttesterScript::Kind::GarbageChunks, ValidatorScript::Kind::Honest, ChallengeKind::Attestation},
      {AttesterScript::Kind::Stall, ValidatorScript::Kind::Honest, ChallengeKind::Salt},
  };
  for (const auto& tc : cases) {
    CAPTURE(to_string(tc.kind));
    auto setup = small_cycle(31);
    setup.attesters[1].second.kind = tc.kind;
    setup.validators = {{"val", {tc.validator}}};
    const auto r = run_cycle(setup);
    CHECK(r.punished.contains("att/b"));
    CHECK_FALSE(r.punished.contains("att/a"));
    CHECK_FALSE(r.punished.contains("att/c"));
    const auto* c = find_challenge(r, tc.expected, "att/b");
    REQUIRE(c != nullptr);
    CHECK(c->upheld);
    CHECK(r.round == 1);
    CHECK(r.outcome == CycleOutcome::Completed);
    CHECK(r.balances.at("att/b") == Tokens{});
    CHECK(r.conserved);
  }
}

TEST_CASE("honest attesters answer every free challenge") {
  auto setup = small_cycle(41);
  setup.validators = {{"blind/1", {ValidatorScript::Kind::Blind}}, {"blind/2", {ValidatorScript::Kind::Blind}}};
  const auto r = run_cycle(setup);
  std::size_t answered = 0;
  for (const auto& c : r.challenges) {
    if (c.kind != ChallengeKind::FreeChallenge) continue;
    ++answered;
    CHECK_FALSE(c.upheld);
  }
  CHECK(answered == 9);
  CHECK(r.punished.empty());
  CHECK(r.round == 0);
}

TEST_CASE("a random validator cannot beat an honest solver") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto setup = small_cycle(seed);
    setup.validators = {{"rnd", {ValidatorScript::Kind::Random}}, {"stall", {ValidatorScript::Kind::Stall}}};
    const auto r = run_cycle(setup);
    CHECK(r.punished.count("solver") == 0);
    REQUIRE(r.challenges.size() == 2);
    for (const auto& c : r.challenges) CHECK_FALSE(c.upheld);
    CHECK(r.round == 0);
    // the deposits went to the solver
    CHECK(r.balances.at("solver") == Fixed::from_int(200));
    CHECK(r.conserved);
  }
}

TEST_CASE("adversarial verifier policies never win against the honest solver") {
  auto setup = eval::random_fraud_instance(9, 13, 2, 77);
  testing::Arena arena(setup, {}, 40);
  REQUIRE(arena.submitted);
  const auto solver_before = arena.judge.ledger().balance("solver");
  Rng rng(5);
  std::vector<std::uint64_t> sessions;
  std::vector<testing::VerifierPolicy> policies;
  for (const auto& v : arena.verifiers) {
    sessions.push_back(arena.judge.open_em_challenge(v));
    const double bias = rng.uniform();
    const double patience = rng.uniform(0.05, 1.0);
    auto prng = std::make_shared<Rng>(rng.next_u64());
    policies.push_back([=](const auto&) -> std::optional<Side> {
      if (prng->uniform() > patience) return std::nullopt;
      return prng->uniform() < bias ? Side::Right : Side::Left;
    });
  }
  testing::play(arena, sessions, policies);
  for (auto id : sessions) CHECK_FALSE(arena.judge.challenge(id).upheld);
  CHECK(arena.judge.ledger().balance("solver") ==
        solver_before + Tokens::from_int(40) * setup.judge.verifier_deposit);
}

TEST_CASE("staker scripts") {
  auto setup = small_cycle(51);
  setup.stakers[0] = {StakerScript::Kind::WrongSecret};
  setup.stakers[1] = {StakerScript::Kind::OverCap};
  setup.stakers[2] = {StakerScript::Kind::NoReveal};
  setup.stakers[3] = {StakerScript::Kind::ProoflessClaim};
  setup.stakers[4] = {StakerScript::Kind::InflatedClaim};
  const auto r = run_cycle(setup);
  REQUIRE(r.outcome == CycleOutcome::Completed);
  CHECK(r.excluded == std::vector<std::string>{"user/0", "user/1", "user/2"});
  CHECK(r.cycle_users == 9);
  CHECK_FALSE(r.claims.contains("user/0"));
  // the honest proofless claim survives its window; the inflated one is refuted
  CHECK(r.claims.at("user/3") == ClaimOutcome::Instant);
  CHECK(r.rewards.contains("user/3"));
  CHECK(r.claims.at("user/4") == ClaimOutcome::Rejected);
  CHECK_FALSE(r.rewards.contains("user/4"));
  const auto* c = find_challenge(r, ChallengeKind::RewardClaim, "user/4");
  REQUIRE(c != nullptr);
  CHECK(c->upheld);
  CHECK(r.round == 0);
  CHECK(r.conserved);
  // excluded users keep their tokens
  CHECK(r.balances.at("user/0") == StakeLedger::max_stake());
}

TEST_CASE("users below the vote threshold are ineligible") {
  auto setup = small_cycle(61);
  setup.judge.min_votes = 1000;
  const auto r = run_cycle(setup);
  for (const auto& [_, status] : r.claims) CHECK(status == ClaimOutcome::Ineligible);
  CHECK(r.rewards.empty());
  CHECK(r.balances.at("pool") == Fixed::from_int(1000));
}

TEST_CASE("aborted cycles") {
  auto setup = small_cycle(71);
  for (std::size_t i = 0; i < setup.votes.num_users(); ++i) setup.stakers[i] = {StakerScript::Kind::NoReveal};
  auto r = run_cycle(setup);
  CHECK(r.outcome == CycleOutcome::NoStakers);
  CHECK(r.conserved);

  setup = small_cycle(71);
  SolverScript bad;
  bad.kind = SolverScript::Kind::CorruptEmCell;
  setup.solvers = {{"bad", bad}};
  r = run_cycle(setup);
  CHECK(r.outcome == CycleOutcome::NoSolutions);
  CHECK(r.punished.contains("bad"));
  CHECK(r.conserved);
}

TEST_CASE("cycles are deterministic") {
  auto setup = small_cycle(81);
  setup.validators.push_back({"rnd", {ValidatorScript::Kind::Random}});
  setup.attesters.push_back({"att/d", {AttesterScript::Kind::GarbageChunks}});
  const auto a = run_cycle(setup);
  const auto b = run_cycle(setup);
  CHECK(a == b);
  CHECK(report_to_json(a, true) == report_to_json(b, true));
}

TEST_CASE("scenario parsing") {
  const std::string text = R"({
    "seed": 3, "cycle": 2,
    "config": {"solver_bond": 80, "min_votes": 5},
    "dataset": {"preset": "desk", "ap": 0.1, "as": 3, "seed": 2},
    "training": {"k": 4, "epochs": 20},
    "solvers": [{"id": "s1"}, {"id": "s2", "behavior": "corrupt-em-cell", "row": 2, "col": 1, "delta_raw": 5}],
    "attesters": [{"id": "a1"}, {"id": "a2", "behavior": "wrong-salt"}],
    "validators": [{"id": "v1", "behavior": "blind"}],
    "stakers": [{"user": 4, "behavior": "no-reveal"}]
  })";
  const auto s = parse_scenario(text);
  CHECK(s.seed == 3);
  CHECK(s.cycle == 2);
  CHECK(s.judge.solver_bond == Fixed::from_int(80));
  CHECK(s.judge.verifier_deposit == Fixed::from_int(40));
  CHECK(s.judge.min_votes == 5);
  CHECK(s.training.k == 4);
  CHECK(s.training.epochs == 20);
  REQUIRE(s.solvers.size() == 2);
  CHECK(s.solvers[1].second.kind == SolverScript::Kind::CorruptEmCell);
  CHECK(s.solvers[1].second.delta == Fixed::from_raw(5));
  CHECK(s.attesters[1].second.kind == AttesterScript::Kind::WrongSalt);
  CHECK(s.validators[0].second.kind == ValidatorScript::Kind::Blind);
  CHECK(s.stakers.at(4).kind == StakerScript::Kind::NoReveal);
  CHECK(s.votes.num_users() == s.stakes.size());

  CHECK_THROWS_AS(parse_scenario(R"({"dataset": {"preset": "desk"}, "solvers": [{"id": "x", "behavior": "sneaky"}]})"),
                  ScenarioError);
  CHECK_THROWS_AS(parse_scenario("{"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(R"({"seed": 1})"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(R"({"dataset": {"preset": "desk"}, "stakers": [{"user": 100000}]})"),
                  ScenarioError);
}

TEST_CASE("report json carries the outcome and the challenges") {
  auto setup = small_cycle(91);
  SolverScript bad;
  bad.kind = SolverScript::Kind::CorruptEmCell;
  setup.solvers = {{"bad", bad}, {"good", {}}};
  const auto json = report_to_json(run_cycle(setup));
  for (const char* key : {"\"outcome\": \"completed\"", "\"winner\": \"good\"", "\"verdict\": \"upheld\"",
                          "\"kind\": \"error-matrix\"", "\"conserved\": true", "\"punished\": [",
                          "\"rewards_raw\""}) {
    CAPTURE(key);
    CHECK(json.find(key) != std::string::npos);
  }
  CHECK(json.find("transcript") == std::string::npos);
}

}  // TEST_SUITE
