#include "newsgraph/eval/cost.hpp"

#include <bit>

#include "newsgraph/core/errors.hpp"
#include "newsgraph/core/rng.hpp"

namespace newsgraph::eval {

namespace {

int log2_exact(std::size_t power_of_two) { return std::countr_zero(power_of_two); }

}  // namespace

CostReport cost_report(std::size_t users, std::size_t edges, std::size_t k) {
  if (users == 0 || edges == 0 || k == 0) throw DomainError("cost_report needs positive sizes");
  CostReport c;
  c.users = users;
  c.edges = edges;
  c.k = k;
  const ssamt::Shape shape{users, edges};
  c.padded_users = shape.padded_rows();
  c.padded_edges = shape.padded_cols();
  c.leaves = shape.padded_leaves();
  c.log_leaves = log2_exact(c.leaves);
  c.traverse_rounds = c.log_leaves;
  c.total_steps = 2 + 2 * c.log_leaves;
  c.traverse_bytes = 2 * static_cast<std::size_t>(c.log_leaves) * c.node_size;
  c.commitment_bytes = 3 * c.node_size;
  const auto log_u = static_cast<std::size_t>(log2_exact(c.padded_users));
  const auto log_e = static_cast<std::size_t>(log2_exact(c.padded_edges));
  c.fraud_settle_bytes = 128 * (log_u + log_e) + (log_u + log_e + k) * 64;
  c.availability_settle_bytes_u = 128 * users + 32;
  c.availability_settle_bytes_v = 128 * edges + 32;
  c.wire_traverse_bytes = 2 * static_cast<std::size_t>(c.log_leaves) * c.wire_node_size;
  c.wire_commitment_bytes = protocol::SolutionCommitment::kWireBytes;
  return c;
}

protocol::CycleSetup random_fraud_instance(std::size_t users, std::size_t edges, std::size_t k,
                                           std::uint64_t seed) {
  if (users == 0 || edges == 0 || k == 0) throw DomainError("instance needs positive sizes");
  Rng rng(derive_seed(seed, "fraud-instance"));
  std::vector<VoteEntry> entries;
  auto vote = [&] { return vote_from_int(static_cast<int>(rng.below(3)) - 1); };
  for (std::size_t i = 0; i < users; ++i) {
    for (std::size_t j = 0; j < edges; ++j) {
      if (j % users == i || i % edges == j || rng.uniform() < 0.3) {
        entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), vote()});
      }
    }
  }
  protocol::CycleSetup setup;
  setup.seed = seed;
  setup.votes = VoteMatrix(users, edges, std::move(entries));
  for (std::size_t i = 0; i < users; ++i) {
    setup.stakes.push_back(Fixed::from_raw(static_cast<std::int64_t>(1 + rng.below(5ull << 32))));
  }
  LatentFactors f{FixedMatrix(users, k), FixedMatrix(edges, k)};
  for (Fixed& x : f.users.values()) x = Fixed::quantize(rng.uniform(-1.0, 1.0));
  for (Fixed& x : f.edges.values()) x = Fixed::quantize(rng.uniform(-1.0, 1.0));
  setup.factors = std::move(f);
  return setup;
}

LiveGameCost measure_live_game(std::size_t users, std::size_t edges, std::size_t k,
                               std::uint64_t seed) {
  auto setup = random_fraud_instance(users, edges, k, seed);
  Rng rng(derive_seed(seed, "corrupt-cell"));
  protocol::SolverScript faulty;
  faulty.kind = protocol::SolverScript::Kind::CorruptEmCell;
  faulty.row = rng.below(users);
  faulty.col = rng.below(edges);
  setup.solvers = {{"solver", faulty}};
  setup.validators = {{"validator", {}}};
  const auto report = protocol::run_cycle(setup);

  LiveGameCost cost;
  cost.depth = ssamt::Shape{users, edges}.depth();
  for (const auto& c : report.challenges) {
    if (c.kind != protocol::ChallengeKind::ErrorMatrix) continue;
    cost.rounds = c.traverse_rounds;
    cost.prover_bytes = c.prover_bytes;
    cost.solver_punished = c.upheld;
    break;
  }
  return cost;
}

}  // namespace newsgraph::eval
