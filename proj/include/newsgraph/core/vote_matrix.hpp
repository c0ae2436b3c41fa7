#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace newsgraph {

enum class VoteValue : std::int8_t { Negative = -1, Neutral = 0, Positive = 1 };

VoteValue vote_from_int(int value);
inline int to_int(VoteValue v) { return static_cast<int>(v); }

struct VoteEntry {
  std::uint32_t user = 0;
  std::uint32_t edge = 0;
  VoteValue value = VoteValue::Neutral;

  friend bool operator==(const VoteEntry&, const VoteEntry&) = default;
};

/// Sparse users x edges matrix of votes. Missing entries are unobserved.
///
/// Entries are kept sorted row-major (user, then edge). Every edge carries at
/// least one vote; edges without votes are not part of the matrix.
class VoteMatrix {
 public:
  VoteMatrix() = default;

  /// Duplicated (user, edge) pairs resolve to the last one in `entries`.
  /// Throws DomainError for an out-of-range index or an edge with no votes.
  VoteMatrix(std::size_t num_users, std::size_t num_edges,
             std::vector<VoteEntry> entries);

  struct Compacted;
  /// Like the constructor, but drops edges that received no vote and
  /// renumbers the rest in increasing order.
  static Compacted compact(std::size_t num_users, std::size_t num_edges,
                           std::vector<VoteEntry> entries);

  std::size_t num_users() const { return num_users_; }
  std::size_t num_edges() const { return num_edges_; }
  std::size_t num_votes() const { return entries_.size(); }

  std::span<const VoteEntry> entries() const { return entries_; }
  std::span<const VoteEntry> row(std::size_t user) const;
  std::size_t votes_of(std::size_t user) const { return row(user).size(); }
  std::optional<VoteValue> at(std::size_t user, std::size_t edge) const;

  friend bool operator==(const VoteMatrix& a, const VoteMatrix& b) {
    return a.num_users_ == b.num_users_ && a.num_edges_ == b.num_edges_ &&
           a.entries_ == b.entries_;
  }

 private:
  std::size_t num_users_ = 0;
  std::size_t num_edges_ = 0;
  std::vector<VoteEntry> entries_;
  std::vector<std::size_t> row_start_;  // num_users + 1 offsets
};

struct VoteMatrix::Compacted {
  VoteMatrix matrix;
  std::vector<std::uint32_t> edge_origin;  // new edge index -> old edge index
};

}  // namespace newsgraph
