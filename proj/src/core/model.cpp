#include "newsgraph/core/model.hpp"

#include <cmath>
#include <string>

#include "newsgraph/core/errors.hpp"

namespace newsgraph {

namespace {

void check_dims(const VoteMatrix& votes, const LatentFactors& factors) {
  if (factors.users.rows() != votes.num_users() ||
      factors.edges.rows() != votes.num_edges() ||
      factors.users.cols() != factors.edges.cols()) {
    throw DimensionMismatch(
        "factors are " + std::to_string(factors.users.rows()) + "x" +
        std::to_string(factors.users.cols()) + " / " +
        std::to_string(factors.edges.rows()) + "x" + std::to_string(factors.edges.cols()) +
        " but votes are " + std::to_string(votes.num_users()) + "x" +
        std::to_string(votes.num_edges()));
  }
}

void check_dims(const VoteMatrix& votes, const LatentFactors& factors,
                const StakeLedger& ledger) {
  check_dims(votes, factors);
  if (ledger.num_users() != votes.num_users()) {
    throw DimensionMismatch("ledger user count does not match votes");
  }
}

}  // namespace

Fixed weighted_square_error(Fixed stake, std::span<const Fixed> user_row,
                            std::span<const Fixed> edge_row, VoteValue vote) {
  const Fixed residual = dot(user_row, edge_row) - Fixed::from_int(to_int(vote));
  return stake * residual.squared();
}

Fixed frobenius_sq(const FixedMatrix& m) {
  Fixed sum;
  for (Fixed x : m.values()) sum += x.squared();
  return sum;
}

Fixed approximation_error(const VoteMatrix& votes, const LatentFactors& factors,
                          const StakeLedger& ledger) {
  check_dims(votes, factors, ledger);
  Fixed sum;
  for (const auto& e : votes.entries()) {
    sum += weighted_square_error(ledger.stake(e.user), factors.users.row(e.user),
                                 factors.edges.row(e.edge), e.value);
  }
  return sum;
}

Fixed rsbe(const VoteMatrix& votes, const LatentFactors& factors,
           const StakeLedger& ledger, Fixed lambda) {
  if (lambda < Fixed{}) throw DomainError("lambda must be non-negative");
  const Fixed approx = approximation_error(votes, factors, ledger);
  return approx + lambda * (frobenius_sq(factors.users) + frobenius_sq(factors.edges));
}

FixedMatrix ErrorMatrix::dense_squares() const {
  FixedMatrix dense(num_users, num_edges);
  for (const auto& c : cells) dense(c.user, c.edge) = c.squared;
  return dense;
}

Fixed ErrorMatrix::total() const {
  Fixed sum;
  for (const auto& c : cells) sum += c.squared;
  return sum;
}

ErrorMatrix error_matrix(const VoteMatrix& votes, const LatentFactors& factors,
                         const StakeLedger& ledger) {
  check_dims(votes, factors, ledger);
  ErrorMatrix em;
  em.num_users = votes.num_users();
  em.num_edges = votes.num_edges();
  em.cells.reserve(votes.num_votes());
  for (const auto& e : votes.entries()) {
    const Fixed sq = weighted_square_error(ledger.stake(e.user), factors.users.row(e.user),
                                           factors.edges.row(e.edge), e.value);
    em.cells.push_back({e.user, e.edge, sq, std::sqrt(sq.to_double())});
  }
  return em;
}

Fixed squared_deviation(std::size_t user, const VoteMatrix& votes,
                        const LatentFactors& factors) {
  check_dims(votes, factors);
  Fixed sum;
  for (const auto& e : votes.row(user)) {
    const Fixed residual = dot(factors.users.row(e.user), factors.edges.row(e.edge)) -
                           Fixed::from_int(to_int(e.value));
    sum += residual.squared();
  }
  return sum;
}

double consistency_score(std::size_t user, const VoteMatrix& votes,
                         const LatentFactors& factors) {
  const std::size_t n = votes.votes_of(user);
  if (n == 0) {
    throw UndefinedScore("user " + std::to_string(user) + " has no votes");
  }
  const Fixed deviation = std::max(Fixed::epsilon(), squared_deviation(user, votes, factors));
  return static_cast<double>(n) / deviation.to_double();
}

}  // namespace newsgraph
