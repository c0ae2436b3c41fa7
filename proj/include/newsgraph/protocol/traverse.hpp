#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "newsgraph/core/errors.hpp"
#include "newsgraph/ssamt/attestation.hpp"
#include "newsgraph/ssamt/ssamt.hpp"

namespace newsgraph::protocol {

class ProtocolError : public Error {
 public:
  using Error::Error;
};

enum class Phase { AwaitingChildren, AwaitingSelection, AtLeaf, Settled };
enum class Party { Prover, Verifier };
enum class Side : std::uint8_t { Left = 0, Right = 1 };

const char* to_string(Phase p);
const char* to_string(Party p);

/// Child-pair consistency and wire size per node type.
template <typename NodeT>
struct NodeRules;

template <>
struct NodeRules<ssamt::Node> {
  static constexpr std::size_t kWireSize = ssamt::Node::kWireSize;
  static bool consistent(const ssamt::Node& parent, const ssamt::Node& left,
                         const ssamt::Node& right) {
    try {
      return ssamt::combine(left, right) == parent;
    } catch (const ArithmeticOverflow&) {
      return false;
    }
  }
};

template <>
struct NodeRules<Hash32> {
  static constexpr std::size_t kWireSize = 32;
  static bool consistent(const Hash32& parent, const Hash32& left, const Hash32& right) {
    return ssamt::merkle_parent(left, right) == parent;
  }
};

/// Interactive walk from a committed root down to one leaf.
///
/// The prover reveals the children of the current node; the verifier picks
/// the child it disputes. A child pair that does not hash (and, for SSAMT
/// nodes, sum) to the current node loses the game for the prover on the
/// spot. After `depth` selections the session rests at a leaf and waits for
/// the prover's leaf evidence, which the owner of the session judges.
/// Every move has a deadline; when it passes, the party due to move loses.
template <typename NodeT>
class BranchTraverse {
 public:
  BranchTraverse(std::string prover, std::string verifier, NodeT root, int depth,
                 std::uint64_t now, std::uint64_t deadline_ticks)
      : prover_(std::move(prover)), verifier_(std::move(verifier)), root_(root),
        current_(root), depth_(depth), deadline_ticks_(deadline_ticks),
        deadline_(now + deadline_ticks) {
    if (depth_ < 1) throw ProtocolError("traverse needs a tree of depth >= 1");
  }

  const std::string& prover() const { return prover_; }
  const std::string& verifier() const { return verifier_; }
  const NodeT& root() const { return root_; }
  const NodeT& current() const { return current_; }
  Phase phase() const { return phase_; }
  int depth() const { return depth_; }
  int rounds() const { return static_cast<int>(path_.size()); }
  std::uint64_t deadline() const { return deadline_; }
  const std::vector<bool>& path() const { return path_; }
  /// Index of the current node within its level (the leaf index at a leaf).
  std::uint64_t position() const {
    std::uint64_t index = 0;
    for (bool right : path_) index = index << 1 | (right ? 1 : 0);
    return index;
  }
  std::size_t prover_bytes() const { return prover_bytes_; }
  std::size_t verifier_bytes() const { return verifier_bytes_; }
  const std::optional<NodeT>& pending_left() const { return left_; }
  const std::optional<NodeT>& pending_right() const { return right_; }

  std::optional<Party> winner() const { return winner_; }
  const std::string& reason() const { return reason_; }

  /// Returns false when the pair is inconsistent (the prover has lost).
  bool submit_children(const std::string& actor, const NodeT& left, const NodeT& right,
                       std::uint64_t now) {
    require(actor == prover_, "only the prover may reveal children");
    require(phase_ == Phase::AwaitingChildren, "children are not expected now");
    require_in_time(now);
    prover_bytes_ += 2 * NodeRules<NodeT>::kWireSize;
    if (!NodeRules<NodeT>::consistent(current_, left, right)) {
      settle(Party::Verifier, "prover revealed children inconsistent with their parent");
      return false;
    }
    left_ = left;
    right_ = right;
    phase_ = Phase::AwaitingSelection;
    deadline_ = now + deadline_ticks_;
    return true;
  }

  void select(const std::string& actor, Side side, std::uint64_t now) {
    require(actor == verifier_, "only the verifier may select a child");
    require(phase_ == Phase::AwaitingSelection, "a selection is not expected now");
    require_in_time(now);
    verifier_bytes_ += 1;
    const bool right = side == Side::Right;
    current_ = right ? *right_ : *left_;
    path_.push_back(right);
    left_.reset();
    right_.reset();
    phase_ = rounds() == depth_ ? Phase::AtLeaf : Phase::AwaitingChildren;
    deadline_ = now + deadline_ticks_;
  }

  /// Settles by timeout if the deadline has passed. Returns true if it did.
  bool expire(std::uint64_t now) {
    if (phase_ == Phase::Settled || now <= deadline_) return false;
    const Party due = phase_ == Phase::AwaitingSelection ? Party::Verifier : Party::Prover;
    settle(due == Party::Prover ? Party::Verifier : Party::Prover,
           std::string(to_string(due)) + " missed the deadline");
    return true;
  }

  void settle(Party winner, std::string reason) {
    if (phase_ == Phase::Settled) throw ProtocolError("session already settled");
    phase_ = Phase::Settled;
    winner_ = winner;
    reason_ = std::move(reason);
  }

  void require_leaf(const std::string& actor, std::uint64_t now) const {
    require(actor == prover_, "only the prover may settle the leaf");
    require(phase_ == Phase::AtLeaf, "session is not at a leaf");
    require_in_time(now);
  }

 private:
  static void require(bool ok, const char* what) {
    if (!ok) throw ProtocolError(what);
  }
  void require_in_time(std::uint64_t now) const {
    if (now > deadline_) throw ProtocolError("move submitted after the deadline");
  }

  std::string prover_;
  std::string verifier_;
  NodeT root_;
  NodeT current_;
  int depth_;
  std::uint64_t deadline_ticks_;
  std::uint64_t deadline_;
  Phase phase_ = Phase::AwaitingChildren;
  std::vector<bool> path_;
  std::optional<NodeT> left_;
  std::optional<NodeT> right_;
  std::optional<Party> winner_;
  std::string reason_;
  std::size_t prover_bytes_ = 0;
  std::size_t verifier_bytes_ = 0;
};

}  // namespace newsgraph::protocol
