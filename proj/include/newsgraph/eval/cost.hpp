#pragma once

#include <cstdint>

#include "newsgraph/protocol/cycle.hpp"

namespace newsgraph::eval {

/// Round and byte costs of the fraud-proof and data-availability games.
/// Formula fields use the 64-byte SSAMT node (32-byte s) of the analytical
/// model and base-2 logarithms over padded dimensions. The wire_* fields are
/// this implementation's encoding, whose SSAMT node is 40 bytes.
struct CostReport {
  std::size_t users = 0;
  std::size_t edges = 0;
  std::size_t k = 0;
  std::size_t padded_users = 0;
  std::size_t padded_edges = 0;
  std::size_t leaves = 0;  // x: padded leaves of the error-matrix tree
  int log_leaves = 0;

  int traverse_rounds = 0;  // log x
  int total_steps = 0;      // 2 + 2 log x
  std::size_t node_size = 64;
  std::size_t merkle_node_size = 32;
  std::size_t traverse_bytes = 0;            // 2 log x * 64
  std::size_t commitment_bytes = 0;          // 3 * 64
  std::size_t fraud_settle_bytes = 0;        // 128 log(|U||E|) + (log|U| + log|E| + k) * 64
  std::size_t availability_settle_bytes_u = 0;  // 128 MV + 32 with MV = |U|
  std::size_t availability_settle_bytes_v = 0;  // 128 MV + 32 with MV = |E|

  std::size_t wire_node_size = 40;
  std::size_t wire_traverse_bytes = 0;  // 2 log x * 40
  std::size_t wire_commitment_bytes = 0;
};

/// Throws DomainError unless all arguments are positive.
CostReport cost_report(std::size_t users, std::size_t edges, std::size_t k);

struct LiveGameCost {
  int depth = 0;             // padded depth of the error-matrix tree
  int rounds = 0;            // traverse rounds played
  std::size_t prover_bytes = 0;
  bool solver_punished = false;
};

/// A random users x edges instance whose every user and edge has a vote,
/// with random rank-k factors.
protocol::CycleSetup random_fraud_instance(std::size_t users, std::size_t edges, std::size_t k,
                                           std::uint64_t seed);

/// Plays one error-matrix game against a solver that corrupted one cell.
LiveGameCost measure_live_game(std::size_t users, std::size_t edges, std::size_t k,
                               std::uint64_t seed);

}  // namespace newsgraph::eval
