#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "newsgraph/core/rng.hpp"
#include "newsgraph/protocol/judge.hpp"

namespace newsgraph::protocol {

/// Off-chain data that solvers publish, and trees derived from it. Every
/// honest party recomputes the same trees, so they are built once and shared.
class Board {
 public:
  void publish(const ActorId& solver, LatentFactors factors);
  const LatentFactors* factors(const ActorId& solver) const;

  /// Error-matrix tree recomputed from the published factors and the judge's
  /// record of votes and stakes.
  std::shared_ptr<const ssamt::Tree> em_tree(const Judge& judge, const ActorId& solver);
  std::shared_ptr<const ssamt::Tree> factor_tree(const ActorId& solver, Factor which);
  void clear();

 private:
  std::map<ActorId, LatentFactors> factors_;
  std::map<ActorId, std::shared_ptr<const ssamt::Tree>> em_trees_;
  std::map<std::pair<ActorId, Factor>, std::shared_ptr<const ssamt::Tree>> factor_trees_;
};

// ---------------------------------------------------------------- scripts

struct SolverScript {
  enum class Kind { Honest, CorruptEmCell, Stall };
  Kind kind = Kind::Honest;
  // corrupt-em-cell: em^2 at (row, col) of the cycle matrix, indices taken
  // modulo the matrix size, is shifted by delta before committing.
  std::size_t row = 0;
  std::size_t col = 0;
  Fixed delta = Fixed::from_raw(-1);
  std::optional<LatentFactors> external;  // use these instead of training
};

struct AttesterScript {
  enum class Kind { Honest, WithholdData, WrongSalt, GarbageChunks, Stall };
  Kind kind = Kind::Honest;
};

struct ValidatorScript {
  enum class Kind { Honest, Random, Blind, Stall };
  Kind kind = Kind::Honest;
};

struct StakerScript {
  enum class Kind { Honest, WrongSecret, NoReveal, OverCap, ProoflessClaim, InflatedClaim };
  Kind kind = Kind::Honest;
};

const char* to_string(SolverScript::Kind k);
const char* to_string(AttesterScript::Kind k);
const char* to_string(ValidatorScript::Kind k);
const char* to_string(StakerScript::Kind k);
/// Throw ProtocolError for an unknown name.
SolverScript::Kind parse_solver_kind(const std::string& name);
AttesterScript::Kind parse_attester_kind(const std::string& name);
ValidatorScript::Kind parse_validator_kind(const std::string& name);
StakerScript::Kind parse_staker_kind(const std::string& name);

SecretKey actor_key(std::uint64_t seed, const ActorId& id);

// ---------------------------------------------------------------- actors

class SolverActor {
 public:
  SolverActor(ActorId id, SolverScript script) : id_(std::move(id)), script_(std::move(script)) {}

  const ActorId& id() const { return id_; }
  const SolverScript& script() const { return script_; }

  /// Commits to `factors` (or the scripted external factors) and publishes
  /// them. Returns false if the commitment could not be built or was refused.
  bool submit(Judge& judge, Board& board, const LatentFactors& trained);
  const std::optional<SolutionCommitment>& commitment() const { return commitment_; }

  /// Answers every open error-matrix session in which this solver proves.
  void act(Judge& judge);

  /// Children of the session's current node, from this solver's trees.
  std::pair<ssamt::Node, ssamt::Node> children(const BranchTraverse<ssamt::Node>& game) const;
  RowEvidence user_row(std::size_t i) const;
  RowEvidence edge_row(std::size_t j) const;

 private:
  ActorId id_;
  SolverScript script_;
  std::optional<SolutionCommitment> commitment_;
  std::shared_ptr<const ssamt::Tree> tree_u_;
  std::shared_ptr<const ssamt::Tree> tree_v_;
  std::shared_ptr<const ssamt::Tree> tree_em_;
};

class AttesterActor {
 public:
  AttesterActor(ActorId id, AttesterScript script, SecretKey key, std::uint64_t seed)
      : id_(std::move(id)), script_(script), key_(key), rng_(seed) {}

  const ActorId& id() const { return id_; }
  const AttesterScript& script() const { return script_; }

  /// Attests both factor matrices of the winner and reveals the salt.
  void attest(Judge& judge, Board& board);
  /// Answers open attestation sessions and free challenges.
  void act(Judge& judge);
  void reset();

 private:
  struct Holding {
    ssamt::AttestationTree attestation;
    std::shared_ptr<const ssamt::Tree> ssamt;
  };
  const Holding* holding(Factor which) const;

  ActorId id_;
  AttesterScript script_;
  SecretKey key_;
  Rng rng_;
  bool attested_ = false;
  std::optional<Holding> u_;
  std::optional<Holding> v_;
};

class ValidatorActor {
 public:
  ValidatorActor(ActorId id, ValidatorScript script, std::uint64_t seed)
      : id_(std::move(id)), script_(script), rng_(seed) {}

  const ActorId& id() const { return id_; }
  const ValidatorScript& script() const { return script_; }

  /// Inspects the winner's commitment and the attestations; opens challenges.
  void inspect(Judge& judge, Board& board);
  /// Plays the verifier side of every open session it started.
  void act(Judge& judge, Board& board);
  /// Disputes pending reward claims whose row sum disagrees with the record.
  void audit_claims(Judge& judge, Board& board);

  /// Verifier move against an honest reference tree: follow the child that
  /// differs from the reference, left first.
  static Side mismatching_side(const ssamt::Tree& reference, const BranchTraverse<ssamt::Node>& game);
  static Side mismatching_side(const ssamt::AttestationTree& reference,
                               const BranchTraverse<Hash32>& game);

 private:
  ActorId id_;
  ValidatorScript script_;
  Rng rng_;
  std::map<std::uint64_t, std::shared_ptr<const ssamt::AttestationTree>> attestation_refs_;
};

class StakerActor {
 public:
  StakerActor(std::size_t user, ActorId account, Fixed stake, StakerScript script,
              std::uint64_t seed);

  std::size_t user() const { return user_; }
  const ActorId& account() const { return account_; }
  const StakerScript& script() const { return script_; }

  void commit(Judge& judge);
  /// Nothing when the script withholds the reveal.
  std::optional<RevealOutcome> reveal(Judge& judge);
  /// Claims the reward for the cycle; returns the judge's verdict or nothing
  /// if the user is not part of the cycle matrix.
  std::optional<ClaimOutcome> claim(Judge& judge, Board& board);

 private:
  std::size_t user_;
  ActorId account_;
  Fixed stake_;
  StakerScript script_;
  Hash32 secret_{};
};

/// Honest error-matrix row evidence for cycle user `i` from a reference tree.
RowEvidence em_row_evidence(const ssamt::Tree& tree, std::size_t i);

}  // namespace newsgraph::protocol
