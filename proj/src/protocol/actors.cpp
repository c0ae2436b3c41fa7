#include "newsgraph/protocol/actors.hpp"

#include <algorithm>

namespace newsgraph::protocol {

namespace {

template <typename Game>
std::pair<int, std::size_t> child_slot(const Game& game) {
  const int level = game.depth() - game.rounds() - 1;
  return {level, static_cast<std::size_t>(game.position()) * 2};
}

const FixedMatrix& factor_of(const LatentFactors& f, Factor which) {
  return which == Factor::U ? f.users : f.edges;
}

template <typename Kind, std::size_t N>
Kind parse_kind(const std::string& name, const std::array<Kind, N>& kinds, const char* role) {
  for (Kind k : kinds) {
    if (name == to_string(k)) return k;
  }
  throw ProtocolError("unknown " + std::string(role) + " behavior '" + name + "'");
}

}  // namespace

const char* to_string(SolverScript::Kind k) {
  switch (k) {
    case SolverScript::Kind::Honest: return "honest";
    case SolverScript::Kind::CorruptEmCell: return "corrupt-em-cell";
    case SolverScript::Kind::Stall: return "stall";
  }
  return "?";
}

const char* to_string(AttesterScript::Kind k) {
  switch (k) {
    case AttesterScript::Kind::Honest: return "honest";
    case AttesterScript::Kind::WithholdData: return "withhold-data";
    case AttesterScript::Kind::WrongSalt: return "wrong-salt";
    case AttesterScript::Kind::GarbageChunks: return "garbage-chunks";
    case AttesterScript::Kind::Stall: return "stall";
  }
  return "?";
}

const char* to_string(ValidatorScript::Kind k) {
  switch (k) {
    case ValidatorScript::Kind::Honest: return "honest";
    case ValidatorScript::Kind::Random: return "random";
    case ValidatorScript::Kind::Blind: return "blind";
    case ValidatorScript::Kind::Stall: return "stall";
  }
  return "?";
}

const char* to_string(StakerScript::Kind k) {
  switch (k) {
    case StakerScript::Kind::Honest: return "honest";
    case StakerScript::Kind::WrongSecret: return "wrong-secret";
    case StakerScript::Kind::NoReveal: return "no-reveal";
    case StakerScript::Kind::OverCap: return "over-cap";
    case StakerScript::Kind::ProoflessClaim: return "proofless-claim";
    case StakerScript::Kind::InflatedClaim: return "inflated-claim";
  }
  return "?";
}

SolverScript::Kind parse_solver_kind(const std::string& name) {
  using K = SolverScript::Kind;
  return parse_kind(name, std::array{K::Honest, K::CorruptEmCell, K::Stall}, "solver");
}

AttesterScript::Kind parse_attester_kind(const std::string& name) {
  using K = AttesterScript::Kind;
  return parse_kind(name,
                    std::array{K::Honest, K::WithholdData, K::WrongSalt, K::GarbageChunks, K::Stall},
                    "attester");
}

ValidatorScript::Kind parse_validator_kind(const std::string& name) {
  using K = ValidatorScript::Kind;
  return parse_kind(name, std::array{K::Honest, K::Random, K::Blind, K::Stall}, "validator");
}

StakerScript::Kind parse_staker_kind(const std::string& name) {
  using K = StakerScript::Kind;
  return parse_kind(name,
                    std::array{K::Honest, K::WrongSecret, K::NoReveal, K::OverCap,
                               K::ProoflessClaim, K::InflatedClaim},
                    "staker");
}

SecretKey actor_key(std::uint64_t seed, const ActorId& id) {
  Sha256 h;
  h.update(static_cast<std::int64_t>(seed));
  h.update(std::string_view("actor-key/"));
  h.update(std::string_view(id));
  return h.finish();
}

RowEvidence em_row_evidence(const ssamt::Tree& tree, std::size_t i) {
  auto proof = ssamt::row_proof(tree, i);
  auto values = proof.values;
  return {std::move(values), std::move(proof)};
}

// ---------------------------------------------------------------- board

void Board::publish(const ActorId& solver, LatentFactors factors) {
  factors_[solver] = std::move(factors);
  em_trees_.erase(solver);
  factor_trees_.erase({solver, Factor::U});
  factor_trees_.erase({solver, Factor::V});
}

const LatentFactors* Board::factors(const ActorId& solver) const {
  auto it = factors_.find(solver);
  return it == factors_.end() ? nullptr : &it->second;
}

std::shared_ptr<const ssamt::Tree> Board::em_tree(const Judge& judge, const ActorId& solver) {
  if (auto it = em_trees_.find(solver); it != em_trees_.end()) return it->second;
  const auto* f = factors(solver);
  if (!f) return nullptr;
  const auto em = error_matrix(judge.cycle_votes(), *f, judge.cycle_stakes());
  auto tree = std::make_shared<const ssamt::Tree>(
      ssamt::Tree::build(em.dense_squares(), ssamt::LeafRule::Square));
  em_trees_[solver] = tree;
  return tree;
}

std::shared_ptr<const ssamt::Tree> Board::factor_tree(const ActorId& solver, Factor which) {
  const auto key = std::make_pair(solver, which);
  if (auto it = factor_trees_.find(key); it != factor_trees_.end()) return it->second;
  const auto* f = factors(solver);
  if (!f) return nullptr;
  auto tree = std::make_shared<const ssamt::Tree>(ssamt::Tree::build(factor_of(*f, which)));
  factor_trees_[key] = tree;
  return tree;
}

void Board::clear() {
  factors_.clear();
  em_trees_.clear();
  factor_trees_.clear();
}

// ---------------------------------------------------------------- solver

bool SolverActor::submit(Judge& judge, Board& board, const LatentFactors& trained) {
  const LatentFactors& f = script_.external ? *script_.external : trained;
  SolutionCommitment c;
  try {
    FixedMatrix em = error_matrix(judge.cycle_votes(), f, judge.cycle_stakes()).dense_squares();
    if (script_.kind == SolverScript::Kind::CorruptEmCell) {
      Fixed& cell = em(script_.row % em.rows(), script_.col % em.cols());
      cell += script_.delta;
    }
    board.publish(id_, f);
    tree_u_ = board.factor_tree(id_, Factor::U);
    tree_v_ = board.factor_tree(id_, Factor::V);
    tree_em_ = std::make_shared<const ssamt::Tree>(ssamt::Tree::build(em, ssamt::LeafRule::Square));
    c.solver = id_;
    c.k = f.k();
    c.root_u = tree_u_->root();
    c.root_v = tree_v_->root();
    c.root_em = tree_em_->root();
    c.claimed_frob_u = c.root_u.s;
    c.claimed_frob_v = c.root_v.s;
    c.claimed_rsbe = c.root_em.s + judge.config().lambda * (c.claimed_frob_u + c.claimed_frob_v);
  } catch (const Error&) {
    commitment_.reset();
    return false;
  }
  commitment_ = c;
  return judge.submit_solution(std::move(c));
}

std::pair<ssamt::Node, ssamt::Node> SolverActor::children(
    const BranchTraverse<ssamt::Node>& game) const {
  const auto [level, index] = child_slot(game);
  return {tree_em_->node(level, index), tree_em_->node(level, index + 1)};
}

RowEvidence SolverActor::user_row(std::size_t i) const {
  auto proof = ssamt::row_proof(*tree_u_, i);
  auto values = proof.values;
  return {std::move(values), std::move(proof)};
}

RowEvidence SolverActor::edge_row(std::size_t j) const {
  auto proof = ssamt::row_proof(*tree_v_, j);
  auto values = proof.values;
  return {std::move(values), std::move(proof)};
}

void SolverActor::act(Judge& judge) {
  if (script_.kind == SolverScript::Kind::Stall || !tree_em_) return;
  for (const auto& rec : judge.challenges()) {
    if (rec.settled || rec.kind != ChallengeKind::ErrorMatrix || rec.defendant != id_) continue;
    const auto* game = judge.em_session(rec.id);
    if (game->phase() == Phase::AwaitingChildren) {
      const auto [left, right] = children(*game);
      judge.traverse_children(rec.id, id_, left, right);
    } else if (game->phase() == Phase::AtLeaf) {
      const auto [i, j] = judge.em_leaf_cell(rec.id);
      std::optional<RowEvidence> u, v;
      if (i < tree_u_->shape().rows) u = user_row(i);
      if (j < tree_v_->shape().rows) v = edge_row(j);
      judge.settle_em_leaf(rec.id, id_, u, v);
    }
  }
}

// ---------------------------------------------------------------- attester

const AttesterActor::Holding* AttesterActor::holding(Factor which) const {
  const auto& h = which == Factor::U ? u_ : v_;
  return h ? &*h : nullptr;
}

void AttesterActor::reset() {
  attested_ = false;
  u_.reset();
  v_.reset();
}

void AttesterActor::attest(Judge& judge, Board& board) {
  if (script_.kind == AttesterScript::Kind::Stall || attested_) return;
  const auto& w = judge.winner();
  if (!w || !board.factors(w->solver)) return;
  const LatentFactors& f = *board.factors(w->solver);

  const ssamt::Salt salt = script_.kind == AttesterScript::Kind::WrongSalt
                               ? sha256(std::string_view("unsigned salt of " + id_))
                               : sign(key_, public_parameter(judge.cycle(), judge.round()));
  for (Factor which : {Factor::U, Factor::V}) {
    FixedMatrix data = factor_of(f, which);
    if (script_.kind == AttesterScript::Kind::GarbageChunks) {
      for (Fixed& x : data.values()) x = Fixed::quantize(rng_.uniform(-1.0, 1.0));
    }
    Holding h{ssamt::AttestationTree::build(data, salt), board.factor_tree(w->solver, which)};
    judge.attest(id_, which, h.attestation.root());
    (which == Factor::U ? u_ : v_) = std::move(h);
  }
  judge.reveal_salt(id_, salt);
  attested_ = true;
  if (script_.kind == AttesterScript::Kind::WithholdData) {
    u_.reset();
    v_.reset();
  }
}

void AttesterActor::act(Judge& judge) {
  for (const auto& rec : judge.challenges()) {
    if (rec.settled || rec.defendant != id_) continue;
    if (rec.kind == ChallengeKind::Attestation) {
      const auto* h = holding(judge.challenge_factor(rec.id));
      if (!h) continue;
      const auto* game = judge.attestation_session(rec.id);
      if (game->phase() == Phase::AwaitingChildren) {
        const auto [level, index] = child_slot(*game);
        judge.traverse_children(rec.id, id_, h->attestation.node(level, index),
                                h->attestation.node(level, index + 1));
      } else if (game->phase() == Phase::AtLeaf) {
        const std::size_t x = game->position();
        const auto& shape = h->ssamt->shape();
        if (x < h->attestation.num_chunks()) {
          judge.settle_attestation_leaf(rec.id, id_, ssamt::chunk_element(h->attestation.chunk(x)),
                                        ssamt::element_proof(*h->ssamt, x / shape.cols, x % shape.cols));
        } else {
          judge.settle_attestation_leaf(rec.id, id_, Fixed{}, std::nullopt);
        }
      }
    } else if (rec.kind == ChallengeKind::FreeChallenge) {
      const auto x = judge.pending_free_challenge_index(rec.id);
      const auto* h = holding(judge.challenge_factor(rec.id));
      if (!x || !h) continue;
      const auto& shape = h->ssamt->shape();
      FreeChallengeAnswer a;
      a.chunk = h->attestation.chunk(*x);
      a.chunk_proof = ssamt::chunk_proof(h->attestation, *x);
      a.element = ssamt::chunk_element(a.chunk);
      a.element_proof = ssamt::element_proof(*h->ssamt, *x / shape.cols, *x % shape.cols);
      judge.answer_free_challenge(rec.id, id_, a);
    }
  }
}

// ---------------------------------------------------------------- validator

Side ValidatorActor::mismatching_side(const ssamt::Tree& reference,
                                      const BranchTraverse<ssamt::Node>& game) {
  const auto [level, index] = child_slot(game);
  return *game.pending_left() != reference.node(level, index) ? Side::Left : Side::Right;
}

Side ValidatorActor::mismatching_side(const ssamt::AttestationTree& reference,
                                      const BranchTraverse<Hash32>& game) {
  const auto [level, index] = child_slot(game);
  return *game.pending_left() != reference.node(level, index) ? Side::Left : Side::Right;
}

void ValidatorActor::inspect(Judge& judge, Board& board) {
  const auto& w = judge.winner();
  if (!w) return;
  auto open_em = [&] {
    try {
      judge.open_em_challenge(id_);
    } catch (const DomainError&) {
      // cannot afford the deposit
    }
  };

  switch (script_.kind) {
    case ValidatorScript::Kind::Random:
    case ValidatorScript::Kind::Stall:
      open_em();
      return;
    case ValidatorScript::Kind::Blind: {
      const auto p = judge.config().free_challenge_slots;
      for (const auto& [name, rec] : judge.attesters()) {
        if (!rec.selected || rec.punished || !rec.root_u || !rec.root_v) continue;
        for (int used = rec.free_challenges_used; used < p; ++used) {
          const Factor which = used % 2 == 0 ? Factor::U : Factor::V;
          const auto shape = judge.matrix_shape(which);
          judge.free_challenge(id_, name, which, rng_.below(shape.rows * shape.cols));
        }
      }
      return;
    }
    case ValidatorScript::Kind::Honest:
      break;
  }

  std::shared_ptr<const ssamt::Tree> reference;
  try {
    reference = board.em_tree(judge, w->solver);
  } catch (const Error&) {
    reference.reset();
  }
  if (!reference || reference->root() != w->root_em) open_em();

  const auto* f = board.factors(w->solver);
  const Hash32 p = public_parameter(judge.cycle(), judge.round());
  std::vector<ActorId> names;
  for (const auto& [name, rec] : judge.attesters()) {
    if (rec.selected && !rec.punished && rec.salt) names.push_back(name);
  }
  for (const auto& name : names) {
    const auto& rec = judge.attester(name);
    if (rec.punished) continue;
    if (!judge.verify_signature(name, p, *rec.salt)) {
      judge.challenge_salt(id_, name);
      continue;
    }
    if (!f) continue;
    for (Factor which : {Factor::U, Factor::V}) {
      auto ref = std::make_shared<const ssamt::AttestationTree>(
          ssamt::AttestationTree::build(factor_of(*f, which), *rec.salt));
      if (ref->root() == *(which == Factor::U ? rec.root_u : rec.root_v)) continue;
      try {
        attestation_refs_[judge.open_attestation_challenge(id_, name, which)] = ref;
      } catch (const DomainError&) {
        // cannot afford the deposit
      }
      break;
    }
  }
}

void ValidatorActor::act(Judge& judge, Board& board) {
  if (script_.kind == ValidatorScript::Kind::Stall) return;
  for (const auto& rec : judge.challenges()) {
    if (rec.settled || rec.challenger != id_) continue;
    if (rec.kind == ChallengeKind::ErrorMatrix) {
      const auto* game = judge.em_session(rec.id);
      if (game->phase() != Phase::AwaitingSelection) continue;
      std::shared_ptr<const ssamt::Tree> reference;
      if (script_.kind == ValidatorScript::Kind::Honest) {
        try {
          reference = board.em_tree(judge, rec.defendant);
        } catch (const Error&) {
          reference.reset();
        }
      }
      const Side side = reference ? mismatching_side(*reference, *game)
                                  : (rng_.below(2) == 0 ? Side::Left : Side::Right);
      judge.traverse_select(rec.id, id_, side);
    } else if (rec.kind == ChallengeKind::Attestation) {
      const auto* game = judge.attestation_session(rec.id);
      if (game->phase() != Phase::AwaitingSelection) continue;
      auto it = attestation_refs_.find(rec.id);
      const Side side = it != attestation_refs_.end()
                            ? mismatching_side(*it->second, *game)
                            : (rng_.below(2) == 0 ? Side::Left : Side::Right);
      judge.traverse_select(rec.id, id_, side);
    }
  }
}

void ValidatorActor::audit_claims(Judge& judge, Board& board) {
  if (script_.kind != ValidatorScript::Kind::Honest || !judge.winner()) return;
  std::shared_ptr<const ssamt::Tree> reference;
  try {
    reference = board.em_tree(judge, judge.winner()->solver);
  } catch (const Error&) {
    return;
  }
  if (!reference) return;
  const int row_level = reference->shape().col_depth();
  std::vector<std::size_t> disputed;
  for (const auto& [user, claim] : judge.claims()) {
    if (claim.status != ClaimOutcome::Pending || judge.now() > claim.window_end) continue;
    if (reference->node(row_level, user).s != claim.row_square_sum) disputed.push_back(user);
  }
  for (std::size_t user : disputed) judge.dispute_claim(id_, user, em_row_evidence(*reference, user));
}

// ---------------------------------------------------------------- staker

StakerActor::StakerActor(std::size_t user, ActorId account, Fixed stake, StakerScript script,
                         std::uint64_t seed)
    : user_(user), account_(std::move(account)), stake_(stake), script_(script) {
  Sha256 h;
  h.update(static_cast<std::int64_t>(seed));
  h.update(std::string_view("stake-secret/"));
  h.update(std::string_view(account_));
  secret_ = h.finish();
}

void StakerActor::commit(Judge& judge) {
  const Fixed value = script_.kind == StakerScript::Kind::OverCap ? Fixed::from_int(6) : stake_;
  judge.commit_stake(user_, stake_commit_hash(value, secret_));
}

std::optional<RevealOutcome> StakerActor::reveal(Judge& judge) {
  switch (script_.kind) {
    case StakerScript::Kind::NoReveal:
      return std::nullopt;
    case StakerScript::Kind::WrongSecret: {
      Hash32 wrong = secret_;
      wrong[0] ^= 0x01;
      return judge.reveal_stake(user_, stake_, wrong);
    }
    case StakerScript::Kind::OverCap:
      return judge.reveal_stake(user_, Fixed::from_int(6), secret_);
    default:
      return judge.reveal_stake(user_, stake_, secret_);
  }
}

std::optional<ClaimOutcome> StakerActor::claim(Judge& judge, Board& board) {
  const auto& users = judge.cycle_users();
  const auto it = std::lower_bound(users.begin(), users.end(), user_);
  if (it == users.end() || *it != user_ || !judge.winner()) return std::nullopt;
  const auto c = static_cast<std::size_t>(it - users.begin());
  const auto reference = board.em_tree(judge, judge.winner()->solver);
  const Fixed sum = reference->node(reference->shape().col_depth(), c).s;
  switch (script_.kind) {
    case StakerScript::Kind::ProoflessClaim:
      return judge.claim_reward(c, sum, std::nullopt);
    case StakerScript::Kind::InflatedClaim:
      return judge.claim_reward(c, Fixed::from_raw(sum.raw() / 4), std::nullopt);
    default:
      return judge.claim_reward(c, sum, em_row_evidence(*reference, c));
  }
}

}  // namespace newsgraph::protocol
