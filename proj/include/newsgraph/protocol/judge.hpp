#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "newsgraph/core/model.hpp"
#include "newsgraph/protocol/traverse.hpp"
#include "newsgraph/ssamt/attestation.hpp"
#include "newsgraph/ssamt/ssamt.hpp"

namespace newsgraph::protocol {

using ActorId = std::string;
using SecretKey = Hash32;

struct JudgeConfig {
  Fixed lambda = Fixed::quantize(0.1);
  std::uint64_t deadline_ticks = 16;
  Tokens solver_bond = Fixed::from_int(100);
  Tokens attester_bond = Fixed::from_int(50);
  Tokens verifier_deposit = Fixed::from_int(50);
  int free_challenge_slots = 3;
  std::uint64_t reward_window_ticks = 1000;
  int max_repeats = 8;
  Tokens reward_pool = Fixed::from_int(1000);
  std::size_t min_votes = 10;
  std::size_t min_attesters = 3;
};

/// H(value raw, 8 bytes BE || secret).
Hash32 stake_commit_hash(Fixed value, const Hash32& secret);
/// p = H(cn || rn), both as 256-bit big-endian numbers.
Hash32 public_parameter(std::uint64_t cycle, std::uint64_t round);
/// Simulated signature: H(key || message).
Hash32 sign(const SecretKey& key, const Hash32& message);

enum class Factor : std::uint8_t { U = 0, V = 1 };
const char* to_string(Factor m);

struct SolutionCommitment {
  ActorId solver;
  std::size_t k = 0;
  ssamt::Node root_u;
  ssamt::Node root_v;
  ssamt::Node root_em;
  Fixed claimed_frob_u;
  Fixed claimed_frob_v;
  Fixed claimed_rsbe;
  std::uint64_t submit_tick = 0;

  static constexpr std::size_t kWireBytes = 3 * ssamt::Node::kWireSize;
};

/// Minimal claimed RSBE; ties by earlier submit tick, then solver id.
/// Throws ProtocolError for an empty set.
ActorId select_winner(std::span<const SolutionCommitment> commitments);

struct AttesterRecord {
  ActorId id;
  bool bonded = false;
  bool selected = false;
  bool punished = false;
  std::optional<Hash32> root_u;
  std::optional<Hash32> root_v;
  std::optional<ssamt::Salt> salt;  // set when revealed
  int free_challenges_used = 0;
};

enum class RevealOutcome { Locked, HashMismatch, InvalidValue };

enum class ChallengeKind { ErrorMatrix, Attestation, FreeChallenge, Salt, RewardClaim };
const char* to_string(ChallengeKind k);

struct ChallengeRecord {
  std::uint64_t id = 0;
  ChallengeKind kind = ChallengeKind::ErrorMatrix;
  ActorId challenger;
  ActorId defendant;
  std::uint64_t round = 0;
  bool settled = false;
  bool upheld = false;  // challenger won
  int traverse_rounds = 0;
  std::uint64_t position = 0;  // node index reached by a traverse
  std::size_t prover_bytes = 0;
  std::string detail;

  friend bool operator==(const ChallengeRecord&, const ChallengeRecord&) = default;
};

struct RowEvidence {
  std::vector<Fixed> values;
  ssamt::Proof proof;
};

struct FreeChallengeAnswer {
  ssamt::Chunk chunk{};
  ssamt::MerkleProof chunk_proof;
  Fixed element;
  ssamt::Proof element_proof;
};

enum class ClaimOutcome { Instant, Pending, Rejected, Ineligible };
const char* to_string(ClaimOutcome c);

struct RewardClaim {
  std::size_t user = 0;  // cycle user index
  Fixed row_square_sum;
  ClaimOutcome status = ClaimOutcome::Pending;
  std::uint64_t window_end = 0;
  Tokens paid;
};

/// The on-chain arbiter. A single serialized state machine: moves are
/// applied in call order and stamped with the current logical tick. The
/// scheduler owns the clock and advances it between steps.
///
/// Users are identified by their index in the voting-phase matrix
/// ("registered users"). After stake reveal, the judge rebuilds the cycle
/// matrix from the users who locked a stake; all later user indices refer to
/// that cycle matrix.
class Judge {
 public:
  Judge(JudgeConfig config, std::uint64_t cycle_number, std::uint64_t seed);

  const JudgeConfig& config() const { return config_; }
  std::uint64_t now() const { return now_; }
  std::uint64_t cycle() const { return cycle_; }
  std::uint64_t round() const { return round_; }
  void advance(std::uint64_t ticks) { now_ += ticks; }
  StakeLedger& ledger() { return ledger_; }
  const StakeLedger& ledger() const { return ledger_; }
  const std::vector<std::string>& log() const { return log_; }

  // --- registry (simulated PKI) ---
  void register_actor(const ActorId& id, const SecretKey& key);
  bool verify_signature(const ActorId& id, const Hash32& message, const Hash32& signature) const;

  // --- voting phase ---
  void set_votes(VoteMatrix votes, std::vector<ActorId> user_accounts);
  void commit_stake(std::size_t user, const Hash32& commit_hash);

  /// Throws ProtocolError for a reveal without a commit. A mismatching hash
  /// or a value outside (0, 5] excludes the user without punishment.
  RevealOutcome reveal_stake(std::size_t user, Fixed value, const Hash32& secret);
  /// Builds the cycle matrix from users with a locked stake.
  void close_stake_reveal();
  const VoteMatrix& cycle_votes() const { return cycle_votes_; }
  const StakeLedger& cycle_stakes() const { return cycle_stakes_; }
  /// Cycle user index -> registered user index.
  const std::vector<std::size_t>& cycle_users() const { return cycle_users_; }
  const std::vector<std::uint32_t>& cycle_edges() const { return cycle_edges_; }

  // --- bonds and solutions ---
  void post_attester_bond(const ActorId& attester);

  void post_solver_bond(const ActorId& solver);
  /// Stores the commitment if the solver is bonded and not punished, its
  /// Frobenius claims equal the U/V root sums and the RSBE identity holds.
  bool submit_solution(SolutionCommitment c, std::string* why = nullptr);
  const std::vector<SolutionCommitment>& solutions() const { return solutions_; }

  // --- winner ---
  std::optional<ActorId> appoint_winner();
  const std::optional<SolutionCommitment>& winner() const { return winner_; }

  // --- attestation ---
  /// Seeded choice of ceil(sqrt(n)) bonded attesters, at least min_attesters.
  std::vector<ActorId> select_attesters();
  void attest(const ActorId& attester, Factor which, const Hash32& root);
  void reveal_salt(const ActorId& attester, const ssamt::Salt& salt);
  const AttesterRecord& attester(const ActorId& id) const;
  const std::map<ActorId, AttesterRecord>& attesters() const { return attesters_; }
  ssamt::Shape matrix_shape(Factor which) const;

  // --- error-matrix fraud proof ---
  std::uint64_t open_em_challenge(const ActorId& verifier);
  // --- attestation branch traverse ---
  std::uint64_t open_attestation_challenge(const ActorId& verifier, const ActorId& attester,
                                           Factor which);
  // --- shared traverse moves (SSAMT or Merkle session) ---
  bool traverse_children(std::uint64_t session, const ActorId& actor, const ssamt::Node& left,
                         const ssamt::Node& right);
  bool traverse_children(std::uint64_t session, const ActorId& actor, const Hash32& left,
                         const Hash32& right);
  void traverse_select(std::uint64_t session, const ActorId& actor, Side side);

  /// Solver's leaf evidence: U_i with a row proof against SR_U and V_j with a
  /// row proof against SR_V. Ignored for unobserved or padding cells.
  /// Returns true when the solver wins.
  bool settle_em_leaf(std::uint64_t session, const ActorId& actor,
                      const std::optional<RowEvidence>& user_row,
                      const std::optional<RowEvidence>& edge_row);
  /// Attester's leaf evidence: D[x] with an SSAMT element proof against the
  /// solver's root. Returns true when the attester wins.
  bool settle_attestation_leaf(std::uint64_t session, const ActorId& actor,
                               std::optional<Fixed> element,
                               const std::optional<ssamt::Proof>& proof);

  const BranchTraverse<ssamt::Node>* em_session(std::uint64_t id) const;
  const BranchTraverse<Hash32>* attestation_session(std::uint64_t id) const;
  /// Leaf (i, j) addressed by an EM session at a leaf.
  std::pair<std::size_t, std::size_t> em_leaf_cell(std::uint64_t session) const;

  // --- free challenges and salt checks ---
  std::uint64_t free_challenge(const ActorId& verifier, const ActorId& attester, Factor which,
                               std::size_t x);
  bool answer_free_challenge(std::uint64_t id, const ActorId& actor,
                             const FreeChallengeAnswer& answer);
  std::optional<std::size_t> pending_free_challenge_index(std::uint64_t id) const;
  /// Factor matrix addressed by an attestation session or free challenge.
  Factor challenge_factor(std::uint64_t id) const;
  bool challenge_salt(const ActorId& verifier, const ActorId& attester);

  /// Settles every session, free challenge and salt reveal whose deadline
  /// has passed.
  void expire();
  bool all_settled() const;
  const std::vector<ChallengeRecord>& challenges() const { return challenges_; }
  const ChallengeRecord& challenge(std::uint64_t id) const { return challenges_.at(id); }

  /// Ends the challenge window. If any challenge of this round was upheld, advances
  /// rn, clears the solution set and the attestations, and returns true.
  bool finish_round();

  // --- rewards ---
  bool eligible(std::size_t user) const;
  ClaimOutcome claim_reward(std::size_t user, Fixed row_square_sum,
                            const std::optional<RowEvidence>& evidence);
  /// A validator refutes a proofless claim by proving the true row sum.
  bool dispute_claim(const ActorId& verifier, std::size_t user, const RowEvidence& evidence);
  /// Pays instant claims now and pending claims whose window has ended.
  /// Shares are computed once, over every non-rejected claim.
  void pay_rewards();
  const std::map<std::size_t, RewardClaim>& claims() const { return claims_; }
  const ActorId& user_account(std::size_t cycle_user) const;

  /// Returns remaining bonds and locked stakes to their owners.
  void close_cycle();

  std::set<ActorId> punished() const;
  static const char* pool_account() { return "pool"; }

 private:
  struct EmSession {
    std::uint64_t challenge;
    BranchTraverse<ssamt::Node> game;
  };
  struct AttestationSession {
    std::uint64_t challenge;
    Factor which;
    BranchTraverse<Hash32> game;
  };
  struct FreeChallenge {
    std::uint64_t challenge;
    Factor which;
    std::size_t index;
    std::uint64_t deadline;
  };

  std::uint64_t new_challenge(ChallengeKind kind, const ActorId& challenger,
                              const ActorId& defendant);
  void resolve(std::uint64_t challenge, bool upheld, const std::string& detail);
  void note(const std::string& line);
  const SolutionCommitment& require_winner() const;
  const ssamt::Node& matrix_root(Factor which) const;
  ssamt::Salt expected_salt(const ActorId& attester) const;
  AttesterRecord& attester_mut(const ActorId& id);
  void punish_attester(const ActorId& id);
  void fix_shares();

  JudgeConfig config_;
  std::uint64_t cycle_;
  std::uint64_t seed_;
  std::uint64_t round_ = 0;
  std::uint64_t now_ = 0;
  StakeLedger ledger_;
  std::vector<std::string> log_;
  std::map<ActorId, SecretKey> keys_;

  VoteMatrix votes_;
  std::vector<ActorId> user_accounts_;
  std::map<std::size_t, Hash32> stake_commits_;
  std::map<std::size_t, Fixed> locked_stakes_;
  bool reveal_closed_ = false;
  VoteMatrix cycle_votes_;
  StakeLedger cycle_stakes_;
  std::vector<std::size_t> cycle_users_;
  std::vector<std::uint32_t> cycle_edges_;

  std::set<ActorId> solver_bonds_;
  std::set<ActorId> punished_solvers_;
  std::vector<SolutionCommitment> solutions_;
  std::optional<SolutionCommitment> winner_;
  std::map<ActorId, AttesterRecord> attesters_;

  std::vector<ChallengeRecord> challenges_;
  std::map<std::uint64_t, EmSession> em_sessions_;
  std::map<std::uint64_t, AttestationSession> attestation_sessions_;
  std::map<std::uint64_t, FreeChallenge> free_challenges_;
  std::uint64_t attest_deadline_ = 0;

  std::map<std::size_t, RewardClaim> claims_;
  bool shares_fixed_ = false;
  std::map<std::size_t, Tokens> shares_;
};

}  // namespace newsgraph::protocol
