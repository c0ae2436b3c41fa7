#include "newsgraph/eval/measures.hpp"

#include <cmath>
#include <limits>

#include "newsgraph/core/errors.hpp"

namespace newsgraph::eval {

namespace {

double user_square_deviation(std::size_t user, const VoteMatrix& votes,
                             const LatentFactors& factors) {
  double sum = 0.0;
  const auto u = factors.users.row(user);
  for (const VoteEntry& e : votes.row(user)) {
    const auto v = factors.edges.row(e.edge);
    double predicted = 0.0;
    for (std::size_t f = 0; f < u.size(); ++f) predicted += u[f].to_double() * v[f].to_double();
    const double d = to_int(e.value) - predicted;
    sum += d * d;
  }
  return sum;
}

}  // namespace

double rmse(std::span<const std::size_t> users, const VoteMatrix& votes,
            const LatentFactors& factors) {
  if (users.empty()) throw DomainError("rmse of an empty user set");
  if (factors.users.rows() != votes.num_users() || factors.edges.rows() != votes.num_edges() ||
      factors.users.cols() != factors.edges.cols()) {
    throw DimensionMismatch("factors do not match the vote matrix");
  }
  double total = 0.0;
  for (std::size_t i : users) {
    if (i >= votes.num_users()) throw DomainError("rmse: user index out of range");
    total += user_square_deviation(i, votes, factors);
  }
  return std::sqrt(total / static_cast<double>(users.size()));
}

const char* to_string(ErStatus s) {
  switch (s) {
    case ErStatus::Defined: return "defined";
    case ErStatus::NoAdversaries: return "no-adversaries";
    case ErStatus::NoHonest: return "no-honest-users";
    case ErStatus::PerfectHonestFit: return "perfect-honest-fit";
  }
  return "?";
}

ErrorRatio error_ratio(const VoteMatrix& votes, const LatentFactors& factors,
                       const std::vector<bool>& adversary) {
  if (adversary.size() != votes.num_users()) {
    throw DimensionMismatch("one adversary flag per user required");
  }
  std::vector<std::size_t> honest, adversaries;
  for (std::size_t i = 0; i < adversary.size(); ++i) {
    (adversary[i] ? adversaries : honest).push_back(i);
  }
  ErrorRatio r;
  if (adversaries.empty()) {
    r.status = ErStatus::NoAdversaries;
    r.er = std::numeric_limits<double>::quiet_NaN();
    r.rmse_honest = rmse(honest, votes, factors);
    return r;
  }
  if (honest.empty()) {
    r.status = ErStatus::NoHonest;
    r.er = std::numeric_limits<double>::quiet_NaN();
    r.rmse_adversary = rmse(adversaries, votes, factors);
    return r;
  }
  r.rmse_honest = rmse(honest, votes, factors);
  r.rmse_adversary = rmse(adversaries, votes, factors);
  if (r.rmse_honest == 0.0) {
    r.status = ErStatus::PerfectHonestFit;
    r.er = std::numeric_limits<double>::infinity();
    return r;
  }
  r.er = r.rmse_adversary / r.rmse_honest;
  return r;
}

}  // namespace newsgraph::eval
