#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "newsgraph/core/model.hpp"

namespace newsgraph::sbsvd {

struct HyperParams {
  int k = 10;
  double beta = 0.005;   // regularization variable
  double gamma = 0.005;  // learning rate
  int epochs = 1000;
  std::uint64_t seed = 1;

  /// Throws DomainError unless k >= 1, gamma > 0, beta >= 0, epochs >= 1.
  void validate() const;
};

struct TrainReport {
  HyperParams params;
  Fixed lambda;
  LatentFactors factors;        // quantized
  Fixed rsbe;                   // recomputed in fixed point from `factors`
  std::vector<double> epoch_errors;  // float RSBE after each epoch

  double final_float_rsbe() const { return epoch_errors.back(); }
};

struct FactorPair {
  double user;
  double edge;
};

/// One SGD step on a single latent coordinate. Both right-hand sides use the
/// pre-update values:
///   u' = u + gamma * (e * v - beta * u)
///   v' = v + gamma * (e * u - beta * v)
/// where e is the stake-weighted signed residual s * (r - U_i . V_j).
constexpr FactorPair update_rule(double u, double v, double e, double gamma, double beta) {
  return {u + gamma * (e * v - beta * u), v + gamma * (e * u - beta * v)};
}

/// Any |factor| above this ends training with a DivergenceError.
inline constexpr double kDivergenceLimit = 1e6;

/// Stake-based SGD factorization. Requires every user to have a vote.
TrainReport train(const VoteMatrix& votes, const StakeLedger& ledger,
                  const HyperParams& params, Fixed lambda);

/// Float RSBE with real-valued stakes, used for the per-epoch trace.
double float_rsbe(const VoteMatrix& votes, const StakeLedger& ledger,
                  const RealMatrix& users, const RealMatrix& edges, double lambda);

struct GridCell {
  int k;
  double beta;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Parses "k=6,8,10;beta=0,0.005" into the cartesian product, k-major.
std::vector<GridCell> parse_grid(std::string_view text);
std::vector<GridCell> default_grid();

struct GridOutcome {
  GridCell cell;
  std::optional<TrainReport> report;  // empty when training diverged
  std::string failure;
};

struct GridResult {
  std::vector<GridOutcome> table;  // in grid order
  std::size_t best = 0;

  const TrainReport& best_report() const { return *table[best].report; }
};

/// Trains every cell with `base` (k and beta overridden) and picks the
/// lowest fixed-point RSBE; ties go to the smaller k, then the smaller beta.
/// Throws DivergenceError when every cell diverged.
GridResult grid_search(const VoteMatrix& votes, const StakeLedger& ledger, Fixed lambda,
                       const std::vector<GridCell>& grid, const HyperParams& base,
                       unsigned jobs = 1);

}  // namespace newsgraph::sbsvd
