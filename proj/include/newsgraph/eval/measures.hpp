#pragma once

#include <span>
#include <vector>

#include "newsgraph/core/model.hpp"

namespace newsgraph::eval {

/// sqrt(sum over users in S of their squared deviations, divided by |S|).
/// The divisor is the number of users, not the number of votes.
/// Throws DomainError for an empty set.
double rmse(std::span<const std::size_t> users, const VoteMatrix& votes,
            const LatentFactors& factors);

enum class ErStatus { Defined, NoAdversaries, NoHonest, PerfectHonestFit };
const char* to_string(ErStatus s);

struct ErrorRatio {
  ErStatus status = ErStatus::Defined;
  double er = 0.0;  // rmse_adversary / rmse_honest; NaN or +inf when undefined
  double rmse_honest = 0.0;
  double rmse_adversary = 0.0;
};

/// RMSE(adversaries) / RMSE(honest users).
ErrorRatio error_ratio(const VoteMatrix& votes, const LatentFactors& factors,
                       const std::vector<bool>& adversary);

}  // namespace newsgraph::eval
