#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "newsgraph/core/fixed_point.hpp"
#include "newsgraph/core/hash.hpp"
#include "newsgraph/core/matrix.hpp"
#include "newsgraph/core/stake_ledger.hpp"
#include "newsgraph/core/vote_matrix.hpp"

namespace newsgraph {

/// News items and the deduplicated relations between them.
struct NewsGraph {
  std::vector<Hash32> items;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // item indices, a < b
};

/// User factors (users x k) and relation factors (edges x k).
struct LatentFactors {
  FixedMatrix users;
  FixedMatrix edges;

  std::size_t k() const { return users.cols(); }
  friend bool operator==(const LatentFactors&, const LatentFactors&) = default;
};

/// s * (u . v - r)^2 with one rounding for the dot product and one for each
/// multiplication. Shared by every stake-weighted error below so that their
/// sums agree bit for bit.
Fixed weighted_square_error(Fixed stake, std::span<const Fixed> user_row,
                            std::span<const Fixed> edge_row, VoteValue vote);

Fixed frobenius_sq(const FixedMatrix& m);

/// Sum over observed cells of s_i * (r_ij - U_i . V_j)^2, row-major order.
Fixed approximation_error(const VoteMatrix& votes, const LatentFactors& factors,
                          const StakeLedger& ledger);

/// approximation_error + lambda * (|U|^2 + |V|^2).
Fixed rsbe(const VoteMatrix& votes, const LatentFactors& factors,
           const StakeLedger& ledger, Fixed lambda);

struct ErrorCell {
  std::uint32_t user;
  std::uint32_t edge;
  Fixed squared;  // em^2, exact
  double value;   // em = sqrt(em^2), informational only
};

/// Error matrix at observed cells. Unobserved cells are zero.
struct ErrorMatrix {
  std::size_t num_users = 0;
  std::size_t num_edges = 0;
  std::vector<ErrorCell> cells;  // row-major

  /// Dense users x edges matrix of em^2 values, zero where unobserved.
  FixedMatrix dense_squares() const;
  Fixed total() const;
};

ErrorMatrix error_matrix(const VoteMatrix& votes, const LatentFactors& factors,
                         const StakeLedger& ledger);

/// Unweighted vote count over squared deviation, with the deviation floored
/// at 2^-32. Throws UndefinedScore for a user without votes.
double consistency_score(std::size_t user, const VoteMatrix& votes,
                         const LatentFactors& factors);

/// Sum over the user's observed cells of (r - U_i . V_j)^2 in fixed point.
Fixed squared_deviation(std::size_t user, const VoteMatrix& votes,
                        const LatentFactors& factors);

}  // namespace newsgraph
