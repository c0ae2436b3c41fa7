#include "newsgraph/protocol/judge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "newsgraph/core/rng.hpp"

namespace newsgraph::protocol {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::AwaitingChildren: return "awaiting-children";
    case Phase::AwaitingSelection: return "awaiting-selection";
    case Phase::AtLeaf: return "at-leaf";
    case Phase::Settled: return "settled";
  }
  return "?";
}

const char* to_string(Party p) { return p == Party::Prover ? "prover" : "verifier"; }

const char* to_string(Factor m) { return m == Factor::U ? "U" : "V"; }

const char* to_string(ChallengeKind k) {
  switch (k) {
    case ChallengeKind::ErrorMatrix: return "error-matrix";
    case ChallengeKind::Attestation: return "attestation";
    case ChallengeKind::FreeChallenge: return "free-challenge";
    case ChallengeKind::Salt: return "salt";
    case ChallengeKind::RewardClaim: return "reward-claim";
  }
  return "?";
}

const char* to_string(ClaimOutcome c) {
  switch (c) {
    case ClaimOutcome::Instant: return "instant";
    case ClaimOutcome::Pending: return "pending";
    case ClaimOutcome::Rejected: return "rejected";
    case ClaimOutcome::Ineligible: return "ineligible";
  }
  return "?";
}

Hash32 stake_commit_hash(Fixed value, const Hash32& secret) {
  Sha256 h;
  h.update(value.raw());
  h.update(Bytes(secret));
  return h.finish();
}

Hash32 public_parameter(std::uint64_t cycle, std::uint64_t round) {
  std::array<std::uint8_t, 64> buf{};
  put_be64(buf.data() + 24, cycle);
  put_be64(buf.data() + 56, round);
  return sha256(Bytes(buf));
}

Hash32 sign(const SecretKey& key, const Hash32& message) {
  Sha256 h;
  h.update(Bytes(key));
  h.update(Bytes(message));
  return h.finish();
}

ActorId select_winner(std::span<const SolutionCommitment> commitments) {
  if (commitments.empty()) throw ProtocolError("no solution commitments");
  const auto best = std::min_element(
      commitments.begin(), commitments.end(), [](const auto& a, const auto& b) {
        return std::tie(a.claimed_rsbe, a.submit_tick, a.solver) <
               std::tie(b.claimed_rsbe, b.submit_tick, b.solver);
      });
  return best->solver;
}

namespace {

std::string deposit_account(std::uint64_t challenge) {
  return "deposit/challenge/" + std::to_string(challenge);
}

std::string stake_account(const ActorId& user) { return "stake/" + user; }

}  // namespace

Judge::Judge(JudgeConfig config, std::uint64_t cycle_number, std::uint64_t seed)
    : config_(config), cycle_(cycle_number), seed_(seed) {
  if (config_.lambda < Fixed{}) throw DomainError("lambda must be non-negative");
  if (config_.deadline_ticks == 0) throw DomainError("deadline must be at least one tick");
}

void Judge::note(const std::string& line) {
  log_.push_back("[t=" + std::to_string(now_) + " rn=" + std::to_string(round_) + "] " + line);
}

void Judge::register_actor(const ActorId& id, const SecretKey& key) {
  if (!keys_.emplace(id, key).second) throw ProtocolError("actor already registered: " + id);
}

bool Judge::verify_signature(const ActorId& id, const Hash32& message,
                             const Hash32& signature) const {
  auto it = keys_.find(id);
  return it != keys_.end() && sign(it->second, message) == signature;
}

// ---------------------------------------------------------------- staking

void Judge::set_votes(VoteMatrix votes, std::vector<ActorId> user_accounts) {
  if (user_accounts.size() != votes.num_users()) {
    throw DimensionMismatch("one account per registered user required");
  }
  votes_ = std::move(votes);
  user_accounts_ = std::move(user_accounts);
}

void Judge::commit_stake(std::size_t user, const Hash32& commit_hash) {
  if (user >= user_accounts_.size()) throw DomainError("commit_stake: unknown user");
  if (reveal_closed_) throw ProtocolError("stake commitments are closed");
  stake_commits_[user] = commit_hash;
}

RevealOutcome Judge::reveal_stake(std::size_t user, Fixed value, const Hash32& secret) {
  if (reveal_closed_) throw ProtocolError("stake reveal is closed");
  auto it = stake_commits_.find(user);
  if (it == stake_commits_.end()) throw ProtocolError("reveal without a commitment");
  const ActorId& account = user_accounts_[user];
  if (stake_commit_hash(value, secret) != it->second) {
    note("stake reveal of " + account + " does not match its commitment; excluded");
    return RevealOutcome::HashMismatch;
  }
  if (value <= Fixed{} || value > StakeLedger::max_stake() || ledger_.balance(account) < value) {
    note("stake reveal of " + account + " has invalid value " + value.to_string() + "; excluded");
    return RevealOutcome::InvalidValue;
  }
  ledger_.transfer(account, stake_account(account), value);
  locked_stakes_[user] = value;
  return RevealOutcome::Locked;
}

void Judge::close_stake_reveal() {
  if (reveal_closed_) throw ProtocolError("stake reveal already closed");
  reveal_closed_ = true;
  cycle_users_.clear();
  for (const auto& [user, stake] : locked_stakes_) {
    if (votes_.votes_of(user) > 0) cycle_users_.push_back(user);
  }
  std::vector<VoteEntry> entries;
  for (std::size_t c = 0; c < cycle_users_.size(); ++c) {
    for (const VoteEntry& e : votes_.row(cycle_users_[c])) {
      entries.push_back({static_cast<std::uint32_t>(c), e.edge, e.value});
    }
  }
  auto compacted = VoteMatrix::compact(cycle_users_.size(), votes_.num_edges(), std::move(entries));
  cycle_votes_ = std::move(compacted.matrix);
  cycle_edges_ = std::move(compacted.edge_origin);
  cycle_stakes_ = StakeLedger(cycle_users_.size());
  for (std::size_t c = 0; c < cycle_users_.size(); ++c) {
    cycle_stakes_.set_stake(c, locked_stakes_.at(cycle_users_[c]));
  }
  note("stake reveal closed: " + std::to_string(cycle_users_.size()) + " users, " +
       std::to_string(cycle_votes_.num_edges()) + " edges");
}

const ActorId& Judge::user_account(std::size_t cycle_user) const {
  return user_accounts_.at(cycle_users_.at(cycle_user));
}

// ---------------------------------------------------------------- bonds and solutions

void Judge::post_attester_bond(const ActorId& attester) {
  auto& rec = attesters_[attester];
  rec.id = attester;
  if (rec.punished) throw ProtocolError("punished attester cannot bond again this cycle");
  if (rec.bonded) return;
  ledger_.post_bond(attester, BondKind::Attester, config_.attester_bond);
  rec.bonded = true;
}

void Judge::post_solver_bond(const ActorId& solver) {
  if (punished_solvers_.contains(solver)) {
    throw ProtocolError("punished solver cannot bond again this cycle");
  }
  if (solver_bonds_.contains(solver)) return;
  ledger_.post_bond(solver, BondKind::Solver, config_.solver_bond);
  solver_bonds_.insert(solver);
}

bool Judge::submit_solution(SolutionCommitment c, std::string* why) {
  auto reject = [&](const std::string& reason) {
    note("solution of " + c.solver + " rejected: " + reason);
    if (why) *why = reason;
    return false;
  };
  if (!reveal_closed_) return reject("stake reveal still open");
  if (!solver_bonds_.contains(c.solver)) return reject("solver has no bond");
  if (punished_solvers_.contains(c.solver)) return reject("solver was punished");
  if (winner_) return reject("winner already appointed");
  for (const auto& s : solutions_) {
    if (s.solver == c.solver) return reject("duplicate commitment");
  }
  if (c.k == 0) return reject("k must be positive");
  if (c.claimed_frob_u != c.root_u.s || c.claimed_frob_v != c.root_v.s) {
    return reject("Frobenius claims differ from the committed root sums");
  }
  try {
    const Fixed expected = c.root_em.s + config_.lambda * (c.claimed_frob_u + c.claimed_frob_v);
    if (expected != c.claimed_rsbe) return reject("claimed RSBE breaks the arithmetic identity");
  } catch (const ArithmeticOverflow&) {
    return reject("claimed values overflow");
  }
  c.submit_tick = now_;
  note("solution of " + c.solver + " accepted, RSBE " + c.claimed_rsbe.to_string());
  solutions_.push_back(std::move(c));
  return true;
}

std::optional<ActorId> Judge::appoint_winner() {
  if (solutions_.empty()) {
    note("no solutions submitted");
    return std::nullopt;
  }
  const ActorId id = select_winner(solutions_);
  for (const auto& s : solutions_) {
    if (s.solver == id) winner_ = s;
  }
  note("winner appointed: " + id);
  return id;
}

const SolutionCommitment& Judge::require_winner() const {
  if (!winner_) throw ProtocolError("no winner appointed");
  return *winner_;
}

ssamt::Shape Judge::matrix_shape(Factor which) const {
  const auto& w = require_winner();
  return {which == Factor::U ? cycle_votes_.num_users() : cycle_votes_.num_edges(), w.k};
}

const ssamt::Node& Judge::matrix_root(Factor which) const {
  const auto& w = require_winner();
  return which == Factor::U ? w.root_u : w.root_v;
}

// ---------------------------------------------------------------- attesters

std::vector<ActorId> Judge::select_attesters() {
  require_winner();
  std::vector<ActorId> pool;
  for (const auto& [id, rec] : attesters_) {
    if (rec.bonded && !rec.punished) pool.push_back(id);
  }
  const auto wanted = std::max<std::size_t>(
      config_.min_attesters,
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(pool.size())))));
  Rng rng(derive_seed(seed_, "attester-selection", cycle_ << 16 | round_));
  rng.shuffle(std::span<ActorId>(pool));
  pool.resize(std::min(wanted, pool.size()));
  std::sort(pool.begin(), pool.end());
  for (const auto& id : pool) attesters_[id].selected = true;
  attest_deadline_ = now_ + config_.deadline_ticks;
  std::string names;
  for (const auto& id : pool) names += " " + id;
  note("attesters selected:" + names);
  return pool;
}

AttesterRecord& Judge::attester_mut(const ActorId& id) {
  auto it = attesters_.find(id);
  if (it == attesters_.end()) throw ProtocolError("unknown attester: " + id);
  return it->second;
}

const AttesterRecord& Judge::attester(const ActorId& id) const {
  auto it = attesters_.find(id);
  if (it == attesters_.end()) throw ProtocolError("unknown attester: " + id);
  return it->second;
}

void Judge::attest(const ActorId& attester, Factor which, const Hash32& root) {
  auto& rec = attester_mut(attester);
  if (!rec.selected || rec.punished) throw ProtocolError(attester + " is not a selected attester");
  if (now_ > attest_deadline_) throw ProtocolError("attestation after the deadline");
  (which == Factor::U ? rec.root_u : rec.root_v) = root;
  note(attester + " attested " + to_string(which) + " root " + to_hex(Bytes(root)).substr(0, 16));
}

void Judge::reveal_salt(const ActorId& attester, const ssamt::Salt& salt) {
  auto& rec = attester_mut(attester);
  if (!rec.selected || rec.punished) throw ProtocolError(attester + " is not a selected attester");
  if (now_ > attest_deadline_) throw ProtocolError("salt reveal after the deadline");
  if (!rec.root_u || !rec.root_v) throw ProtocolError("salt revealed before both attestations");
  rec.salt = salt;
  note(attester + " revealed its salt");
}

ssamt::Salt Judge::expected_salt(const ActorId& attester) const {
  auto it = keys_.find(attester);
  if (it == keys_.end()) throw ProtocolError("attester has no registered key: " + attester);
  return sign(it->second, public_parameter(cycle_, round_));
}

void Judge::punish_attester(const ActorId& id) { attester_mut(id).punished = true; }

// ---------------------------------------------------------------- challenges

std::uint64_t Judge::new_challenge(ChallengeKind kind, const ActorId& challenger,
                                   const ActorId& defendant) {
  ChallengeRecord rec;
  rec.id = challenges_.size();
  rec.kind = kind;
  rec.challenger = challenger;
  rec.defendant = defendant;
  rec.round = round_;
  challenges_.push_back(rec);
  return rec.id;
}

void Judge::resolve(std::uint64_t id, bool upheld, const std::string& detail) {
  auto& rec = challenges_.at(id);
  if (rec.settled) throw ProtocolError("challenge already settled");
  rec.settled = true;
  rec.upheld = upheld;
  rec.detail = detail;
  if (auto it = em_sessions_.find(id); it != em_sessions_.end()) {
    rec.traverse_rounds = it->second.game.rounds();
    rec.position = it->second.game.position();
    rec.prover_bytes = it->second.game.prover_bytes();
  }
  if (auto it = attestation_sessions_.find(id); it != attestation_sessions_.end()) {
    rec.traverse_rounds = it->second.game.rounds();
    rec.position = it->second.game.position();
    rec.prover_bytes = it->second.game.prover_bytes();
  }

  const std::string deposit = deposit_account(id);
  const Tokens held = ledger_.balance(deposit);
  switch (rec.kind) {
    case ChallengeKind::ErrorMatrix:
      if (upheld) {
        ledger_.forfeit_bond(rec.defendant, BondKind::Solver, rec.challenger);
        punished_solvers_.insert(rec.defendant);
        solver_bonds_.erase(rec.defendant);
        ledger_.transfer(deposit, rec.challenger, held);
      } else {
        ledger_.transfer(deposit, rec.defendant, held);
      }
      break;
    case ChallengeKind::Attestation:
      if (upheld) {
        ledger_.forfeit_bond(rec.defendant, BondKind::Attester, rec.challenger);
        punish_attester(rec.defendant);
        ledger_.transfer(deposit, rec.challenger, held);
      } else {
        ledger_.transfer(deposit, rec.defendant, held);
      }
      break;
    case ChallengeKind::FreeChallenge:
    case ChallengeKind::Salt:
      if (upheld) {
        ledger_.forfeit_bond(rec.defendant, BondKind::Attester,
                             keys_.contains(rec.challenger) ? rec.challenger : pool_account());
        punish_attester(rec.defendant);
      }
      break;
    case ChallengeKind::RewardClaim:
      break;
  }
  note(std::string(to_string(rec.kind)) + " challenge #" + std::to_string(id) + " by " +
       rec.challenger + " against " + rec.defendant + ": " +
       (upheld ? "upheld" : "dismissed") + " (" + detail + ")");
}

std::uint64_t Judge::open_em_challenge(const ActorId& verifier) {
  const auto& w = require_winner();
  if (!keys_.contains(verifier)) throw ProtocolError("unknown verifier: " + verifier);
  const ssamt::Shape shape{cycle_votes_.num_users(), cycle_votes_.num_edges()};
  const auto id = new_challenge(ChallengeKind::ErrorMatrix, verifier, w.solver);
  try {
    ledger_.transfer(verifier, deposit_account(id), config_.verifier_deposit);
  } catch (...) {
    challenges_.pop_back();
    throw;
  }
  em_sessions_.emplace(id, EmSession{id, BranchTraverse<ssamt::Node>(
                                             w.solver, verifier, w.root_em, shape.depth(), now_,
                                             config_.deadline_ticks)});
  note(verifier + " opened error-matrix challenge #" + std::to_string(id) + " (depth " +
       std::to_string(shape.depth()) + ")");
  return id;
}

std::uint64_t Judge::open_attestation_challenge(const ActorId& verifier, const ActorId& attester,
                                                Factor which) {
  const auto& rec = attester_mut(attester);
  if (!keys_.contains(verifier)) throw ProtocolError("unknown verifier: " + verifier);
  const auto& root = which == Factor::U ? rec.root_u : rec.root_v;
  if (!root || !rec.salt) throw ProtocolError("attestation is not complete");
  if (rec.punished) throw ProtocolError("attester already punished");
  const auto shape = matrix_shape(which);
  const int depth = ssamt::attestation_depth(shape.rows * shape.cols);
  const auto id = new_challenge(ChallengeKind::Attestation, verifier, attester);
  try {
    ledger_.transfer(verifier, deposit_account(id), config_.verifier_deposit);
  } catch (...) {
    challenges_.pop_back();
    throw;
  }
  attestation_sessions_.emplace(
      id, AttestationSession{id, which,
                             BranchTraverse<Hash32>(attester, verifier, *root, depth, now_,
                                                    config_.deadline_ticks)});
  note(verifier + " opened attestation challenge #" + std::to_string(id) + " on " + attester +
       "'s " + to_string(which) + " root (depth " + std::to_string(depth) + ")");
  return id;
}

bool Judge::traverse_children(std::uint64_t session, const ActorId& actor,
                              const ssamt::Node& left, const ssamt::Node& right) {
  auto it = em_sessions_.find(session);
  if (it == em_sessions_.end()) throw ProtocolError("no error-matrix session #" + std::to_string(session));
  const bool ok = it->second.game.submit_children(actor, left, right, now_);
  note(actor + " revealed children s=" + left.s.to_string() + " | s=" + right.s.to_string() +
       " in #" + std::to_string(session));
  if (!ok) resolve(session, true, it->second.game.reason());
  return ok;
}

bool Judge::traverse_children(std::uint64_t session, const ActorId& actor, const Hash32& left,
                              const Hash32& right) {
  auto it = attestation_sessions_.find(session);
  if (it == attestation_sessions_.end()) {
    throw ProtocolError("no attestation session #" + std::to_string(session));
  }
  const bool ok = it->second.game.submit_children(actor, left, right, now_);
  note(actor + " revealed children " + to_hex(Bytes(left)).substr(0, 12) + " | " +
       to_hex(Bytes(right)).substr(0, 12) + " in #" + std::to_string(session));
  if (!ok) resolve(session, true, it->second.game.reason());
  return ok;
}

void Judge::traverse_select(std::uint64_t session, const ActorId& actor, Side side) {
  if (auto it = em_sessions_.find(session); it != em_sessions_.end()) {
    it->second.game.select(actor, side, now_);
  } else if (auto at = attestation_sessions_.find(session); at != attestation_sessions_.end()) {
    at->second.game.select(actor, side, now_);
  } else {
    throw ProtocolError("no traverse session #" + std::to_string(session));
  }
  note(actor + " selected the " + (side == Side::Left ? "left" : "right") + " child in #" +
       std::to_string(session));
}

const BranchTraverse<ssamt::Node>* Judge::em_session(std::uint64_t id) const {
  auto it = em_sessions_.find(id);
  return it == em_sessions_.end() ? nullptr : &it->second.game;
}

const BranchTraverse<Hash32>* Judge::attestation_session(std::uint64_t id) const {
  auto it = attestation_sessions_.find(id);
  return it == attestation_sessions_.end() ? nullptr : &it->second.game;
}

std::pair<std::size_t, std::size_t> Judge::em_leaf_cell(std::uint64_t session) const {
  const auto* game = em_session(session);
  if (!game || game->phase() != Phase::AtLeaf) throw ProtocolError("session is not at a leaf");
  const ssamt::Shape shape{cycle_votes_.num_users(), cycle_votes_.num_edges()};
  const auto pos = game->position();
  return {pos / shape.padded_cols(), pos % shape.padded_cols()};
}

bool Judge::settle_em_leaf(std::uint64_t session, const ActorId& actor,
                           const std::optional<RowEvidence>& user_row,
                           const std::optional<RowEvidence>& edge_row) {
  auto it = em_sessions_.find(session);
  if (it == em_sessions_.end()) throw ProtocolError("no error-matrix session #" + std::to_string(session));
  auto& game = it->second.game;
  game.require_leaf(actor, now_);
  const auto [i, j] = em_leaf_cell(session);
  const auto& w = require_winner();
  const ssamt::Node leaf = game.current();

  auto finish = [&](bool solver_wins, const std::string& why) {
    game.settle(solver_wins ? Party::Prover : Party::Verifier, why);
    resolve(session, !solver_wins, why);
    return solver_wins;
  };

  std::optional<VoteValue> vote;
  if (i < cycle_votes_.num_users() && j < cycle_votes_.num_edges()) vote = cycle_votes_.at(i, j);
  if (!vote) {
    const bool ok = leaf == ssamt::make_leaf(Fixed{}, ssamt::LeafRule::Square);
    return finish(ok, ok ? "unobserved cell holds zero" : "unobserved cell holds a non-zero leaf");
  }
  if (!user_row || !edge_row) return finish(false, "row evidence missing");
  const std::size_t k = w.k;
  if (user_row->values.size() != k || edge_row->values.size() != k) {
    return finish(false, "row evidence has the wrong length");
  }
  const ssamt::Shape shape_u{cycle_votes_.num_users(), k};
  const ssamt::Shape shape_v{cycle_votes_.num_edges(), k};
  auto row_ok = [](const ssamt::Node& root, const ssamt::Shape& shape, std::size_t row,
                   const RowEvidence& ev) {
    try {
      return ssamt::verify_row(root, shape, row, ev.values, ev.proof).has_value();
    } catch (const Error&) {
      return false;
    }
  };
  if (!row_ok(w.root_u, shape_u, i, *user_row)) return finish(false, "user row proof fails");
  if (!row_ok(w.root_v, shape_v, j, *edge_row)) return finish(false, "edge row proof fails");
  try {
    const Fixed em2 = weighted_square_error(cycle_stakes_.stake(i), user_row->values,
                                            edge_row->values, *vote);
    const bool ok = leaf == ssamt::make_leaf(em2, ssamt::LeafRule::Square);
    return finish(ok, ok ? "leaf matches recomputed em^2" : "leaf differs from recomputed em^2 " +
                                                                em2.to_string());
  } catch (const ArithmeticOverflow&) {
    return finish(false, "recomputing em^2 overflows");
  }
}

bool Judge::settle_attestation_leaf(std::uint64_t session, const ActorId& actor,
                                    std::optional<Fixed> element,
                                    const std::optional<ssamt::Proof>& proof) {
  auto it = attestation_sessions_.find(session);
  if (it == attestation_sessions_.end()) {
    throw ProtocolError("no attestation session #" + std::to_string(session));
  }
  auto& game = it->second.game;
  game.require_leaf(actor, now_);
  const auto& rec = attester(actor);
  const auto shape = matrix_shape(it->second.which);
  const std::size_t x = game.position();
  const std::size_t n = shape.rows * shape.cols;

  auto finish = [&](bool attester_wins, const std::string& why) {
    game.settle(attester_wins ? Party::Prover : Party::Verifier, why);
    resolve(session, !attester_wins, why);
    return attester_wins;
  };

  if (!element) return finish(false, "no element supplied");
  const Hash32 leaf_hash = sha256(Bytes(ssamt::make_chunk(*element, *rec.salt)));
  if (leaf_hash != game.current()) return finish(false, "chunk does not hash to the leaf");
  if (x >= n) {
    const bool ok = *element == Fixed{};
    return finish(ok, ok ? "padding chunk holds zero" : "padding chunk holds a non-zero element");
  }
  if (!proof) return finish(false, "no element proof supplied");
  bool ok = false;
  try {
    ok = ssamt::verify_element(matrix_root(it->second.which), shape, x / shape.cols,
                               x % shape.cols, *element, *proof);
  } catch (const Error&) {
    ok = false;
  }
  return finish(ok, ok ? "element proven against the solver root"
                       : "element proof fails against the solver root");
}

std::uint64_t Judge::free_challenge(const ActorId& verifier, const ActorId& attester,
                                    Factor which, std::size_t x) {
  auto& rec = attester_mut(attester);
  if (!keys_.contains(verifier)) throw ProtocolError("unknown verifier: " + verifier);
  if (!rec.selected || rec.punished) throw ProtocolError(attester + " is not an active attester");
  if (!(which == Factor::U ? rec.root_u : rec.root_v)) throw ProtocolError("nothing attested yet");
  const auto shape = matrix_shape(which);
  if (x >= shape.rows * shape.cols) throw DomainError("free challenge index out of range");
  if (rec.free_challenges_used >= config_.free_challenge_slots) {
    throw ProtocolError("free challenge slots exhausted for " + attester);
  }
  ++rec.free_challenges_used;
  const auto id = new_challenge(ChallengeKind::FreeChallenge, verifier, attester);
  free_challenges_.emplace(id, FreeChallenge{id, which, x, now_ + config_.deadline_ticks});
  note(verifier + " free-challenged " + attester + " for " + to_string(which) + " chunk " +
       std::to_string(x));
  return id;
}

std::optional<std::size_t> Judge::pending_free_challenge_index(std::uint64_t id) const {
  auto it = free_challenges_.find(id);
  if (it == free_challenges_.end() || challenges_.at(id).settled) return std::nullopt;
  return it->second.index;
}

Factor Judge::challenge_factor(std::uint64_t id) const {
  if (auto it = free_challenges_.find(id); it != free_challenges_.end()) return it->second.which;
  if (auto it = attestation_sessions_.find(id); it != attestation_sessions_.end()) {
    return it->second.which;
  }
  throw ProtocolError("challenge #" + std::to_string(id) + " addresses no factor matrix");
}

bool Judge::answer_free_challenge(std::uint64_t id, const ActorId& actor,
                                  const FreeChallengeAnswer& answer) {
  auto it = free_challenges_.find(id);
  if (it == free_challenges_.end()) throw ProtocolError("no free challenge #" + std::to_string(id));
  auto& rec = challenges_.at(id);
  if (rec.settled) throw ProtocolError("free challenge already settled");
  if (actor != rec.defendant) throw ProtocolError("only the challenged attester may answer");
  if (now_ > it->second.deadline) throw ProtocolError("answer after the deadline");
  const auto& att = attester(actor);
  const auto& fc = it->second;
  const auto shape = matrix_shape(fc.which);
  const Hash32& root = *(fc.which == Factor::U ? att.root_u : att.root_v);

  std::string failure;
  if (!ssamt::verify_chunk(root, shape.rows * shape.cols, fc.index, answer.chunk,
                           answer.chunk_proof)) {
    failure = "chunk proof fails against the attested root";
  } else if (ssamt::chunk_element(answer.chunk) != answer.element) {
    failure = "chunk does not carry the claimed element";
  } else if (att.salt && !std::equal(att.salt->begin(), att.salt->end(), answer.chunk.begin() + 8)) {
    failure = "chunk salt differs from the revealed salt";
  } else {
    bool ok = false;
    try {
      ok = ssamt::verify_element(matrix_root(fc.which), shape, fc.index / shape.cols,
                                 fc.index % shape.cols, answer.element, answer.element_proof);
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) failure = "element proof fails against the solver root";
  }
  resolve(id, !failure.empty(), failure.empty() ? "answered" : failure);
  return failure.empty();
}

bool Judge::challenge_salt(const ActorId& verifier, const ActorId& attester) {
  auto& rec = attester_mut(attester);
  if (!rec.salt) throw ProtocolError("salt not revealed yet");
  if (rec.punished) throw ProtocolError("attester already punished");
  const auto id = new_challenge(ChallengeKind::Salt, verifier, attester);
  const bool valid = *rec.salt == expected_salt(attester);
  resolve(id, !valid, valid ? "salt is the attester's signature of p" : "salt is not Sign(p)");
  return !valid;
}

void Judge::expire() {
  for (auto& [id, s] : em_sessions_) {
    if (s.game.expire(now_)) resolve(id, s.game.winner() == Party::Verifier, s.game.reason());
  }
  for (auto& [id, s] : attestation_sessions_) {
    if (s.game.expire(now_)) resolve(id, s.game.winner() == Party::Verifier, s.game.reason());
  }
  for (auto& [id, fc] : free_challenges_) {
    if (!challenges_.at(id).settled && now_ > fc.deadline) resolve(id, true, "no answer before the deadline");
  }
  if (winner_ && attest_deadline_ > 0 && now_ > attest_deadline_) {
    for (auto& [name, rec] : attesters_) {
      if (rec.selected && !rec.punished && (!rec.root_u || !rec.root_v || !rec.salt)) {
        const auto id = new_challenge(ChallengeKind::Salt, "judge", name);
        resolve(id, true, "attestation or salt missing at the deadline");
      }
    }
  }
}

bool Judge::all_settled() const {
  return std::all_of(challenges_.begin(), challenges_.end(),
                     [](const auto& c) { return c.settled; });
}

bool Judge::finish_round() {
  if (!all_settled()) throw ProtocolError("unsettled challenges remain");
  const bool repeat = std::any_of(challenges_.begin(), challenges_.end(), [&](const auto& c) {
    return c.round == round_ && c.upheld && c.kind != ChallengeKind::RewardClaim;
  });
  if (!repeat) return false;
  ++round_;
  solutions_.clear();
  winner_.reset();
  attest_deadline_ = 0;
  for (auto& [_, rec] : attesters_) {
    rec.selected = false;
    rec.root_u.reset();
    rec.root_v.reset();
    rec.salt.reset();
    rec.free_challenges_used = 0;
  }
  note("challenge upheld; repeating the evaluation");
  return true;
}

// ---------------------------------------------------------------- rewards

bool Judge::eligible(std::size_t user) const {
  return user < cycle_votes_.num_users() && cycle_votes_.votes_of(user) >= config_.min_votes;
}

ClaimOutcome Judge::claim_reward(std::size_t user, Fixed row_square_sum,
                                 const std::optional<RowEvidence>& evidence) {
  const auto& w = require_winner();
  if (claims_.contains(user)) throw ProtocolError("reward already claimed");
  RewardClaim claim;
  claim.user = user;
  claim.row_square_sum = row_square_sum;
  if (!eligible(user) || shares_fixed_) {
    claim.status = ClaimOutcome::Ineligible;
  } else if (evidence) {
    const ssamt::Shape shape{cycle_votes_.num_users(), cycle_votes_.num_edges()};
    std::optional<Fixed> sum;
    try {
      sum = ssamt::verify_row(w.root_em, shape, user, evidence->values, evidence->proof,
                              ssamt::LeafRule::Square);
    } catch (const Error&) {
      sum.reset();
    }
    claim.status = sum && *sum == row_square_sum ? ClaimOutcome::Instant : ClaimOutcome::Rejected;
  } else {
    claim.status = ClaimOutcome::Pending;
    claim.window_end = now_ + config_.reward_window_ticks;
  }
  note("reward claim of " + user_account(user) + ": " + to_string(claim.status));
  claims_[user] = claim;
  return claim.status;
}

bool Judge::dispute_claim(const ActorId& verifier, std::size_t user, const RowEvidence& evidence) {
  const auto& w = require_winner();
  auto it = claims_.find(user);
  if (it == claims_.end() || it->second.status != ClaimOutcome::Pending) {
    throw ProtocolError("no pending claim to dispute");
  }
  if (now_ > it->second.window_end) throw ProtocolError("claim window has closed");
  const auto id = new_challenge(ChallengeKind::RewardClaim, verifier, user_account(user));
  const ssamt::Shape shape{cycle_votes_.num_users(), cycle_votes_.num_edges()};
  std::optional<Fixed> sum;
  try {
    sum = ssamt::verify_row(w.root_em, shape, user, evidence.values, evidence.proof,
                            ssamt::LeafRule::Square);
  } catch (const Error&) {
    sum.reset();
  }
  const bool refuted = sum && *sum != it->second.row_square_sum;
  if (refuted) it->second.status = ClaimOutcome::Rejected;
  resolve(id, refuted, refuted ? "claimed row sum " + it->second.row_square_sum.to_string() +
                                     " differs from proven " + sum->to_string()
                               : "dispute evidence does not refute the claim");
  return refuted;
}

void Judge::fix_shares() {
  shares_fixed_ = true;
  std::vector<std::pair<std::size_t, uint128>> weights;
  uint128 max_w = 0;
  for (const auto& [user, claim] : claims_) {
    if (claim.status != ClaimOutcome::Instant && claim.status != ClaimOutcome::Pending) continue;
    // c(i) = n / max(eps, rowSum / s_i), kept in integers: rowSum / s_i in raw
    // units is floor(rowSum_raw * 2^32 / s_raw), and 2^64 / d scales 1/d.
    const int128 stake = cycle_stakes_.stake(user).raw();
    const int128 sum = std::max<std::int64_t>(claim.row_square_sum.raw(), 0);
    int128 d = (sum << Fixed::kFracBits) / stake;
    if (d < 1) d = 1;
    const uint128 inv = (uint128{1} << 64) / static_cast<uint128>(d);
    const uint128 w = inv * cycle_votes_.votes_of(user);
    weights.emplace_back(user, w);
    max_w = std::max(max_w, w);
  }
  const uint128 pool = static_cast<uint128>(ledger_.balance(pool_account()).raw());
  int shift = 0;
  auto fits = [&] {
    uint128 total = 0;
    for (const auto& [_, w] : weights) total += w >> shift;
    const uint128 limit = std::numeric_limits<uint128>::max() >> 1;
    return (max_w >> shift) == 0 || (pool <= limit / (max_w >> shift) && total <= limit);
  };
  while (!fits()) ++shift;
  uint128 total = 0;
  for (const auto& [_, w] : weights) total += w >> shift;
  for (const auto& [user, w] : weights) {
    const uint128 share = total == 0 ? 0 : pool * (w >> shift) / total;
    shares_[user] = Fixed::from_raw(static_cast<std::int64_t>(share));
  }
}

void Judge::pay_rewards() {
  require_winner();
  if (!shares_fixed_) fix_shares();
  for (auto& [user, claim] : claims_) {
    const bool due = claim.status == ClaimOutcome::Instant ||
                     (claim.status == ClaimOutcome::Pending && now_ > claim.window_end);
    if (!due || claim.paid != Tokens{}) continue;
    const Tokens amount = shares_.at(user);
    ledger_.transfer(pool_account(), user_account(user), amount);
    claim.paid = amount;
    if (claim.status == ClaimOutcome::Pending) claim.status = ClaimOutcome::Instant;
    note("paid " + amount.to_string() + " to " + user_account(user));
  }
}

void Judge::close_cycle() {
  for (const auto& solver : solver_bonds_) ledger_.release_bond(solver, BondKind::Solver);
  solver_bonds_.clear();
  for (auto& [id, rec] : attesters_) {
    if (rec.bonded && !rec.punished) ledger_.release_bond(id, BondKind::Attester);
    rec.bonded = false;
  }
  for (const auto& [user, stake] : locked_stakes_) {
    const auto& account = user_accounts_[user];
    ledger_.transfer(stake_account(account), account, ledger_.balance(stake_account(account)));
  }
  note("cycle closed");
}

std::set<ActorId> Judge::punished() const {
  std::set<ActorId> out(punished_solvers_.begin(), punished_solvers_.end());
  for (const auto& [id, rec] : attesters_) {
    if (rec.punished) out.insert(id);
  }
  return out;
}

}  // namespace newsgraph::protocol
