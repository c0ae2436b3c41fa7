#pragma once

#include <string>
#include <vector>

#include "newsgraph/eval/measures.hpp"
#include "newsgraph/sbsvd/sbsvd.hpp"
#include "newsgraph/synth/votes.hpp"

namespace newsgraph::eval {

/// One dataset of a sweep: noise variance, adversary proportion and stake.
struct SweepPoint {
  double noise_variance = 0.0;
  double adversary_proportion = 0.1;
  Fixed adversary_stake = Fixed::from_int(3);
  std::uint64_t seed = 1;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepRow {
  SweepPoint point;
  bool failed = false;
  std::string failure;
  std::size_t users = 0;
  std::size_t adversaries = 0;
  sbsvd::GridCell best{0, 0.0};
  Fixed rsbe;
  ErrorRatio ratio;
  std::vector<std::pair<sbsvd::GridCell, std::optional<Fixed>>> cells;  // RSBE per grid cell
};

struct SweepResult {
  std::vector<SweepRow> rows;  // in input order

  /// noise_variance,ap,as,users,adversaries,best_k,best_beta,rsbe_raw,rsbe,
  /// er,rmse_honest,rmse_adversary,status
  std::string to_csv() const;
  /// Per (point, cell) RSBE, one line each.
  std::string grid_csv() const;
  /// Whitespace-separated columns "as er best_k best_beta", one block per
  /// (noise, ap) series separated by blank lines.
  std::string to_dat() const;
};

/// Adversary stakes 1..5 for ap in {0.1, 0.3, 0.5} and 1..2 for ap = 0.7.
std::vector<SweepPoint> standard_points(double noise_variance, std::uint64_t seed);

/// For every point: synthesize on `graph`, grid-search SBSVD, and report the
/// ER of the lowest-RSBE cell. A point whose cells all diverge is marked
/// failed rather than aborting the sweep.
SweepResult run_sweep(const synth::SynthConfig& base, const synth::IndexedGraph& graph,
                      const std::vector<SweepPoint>& points,
                      const std::vector<sbsvd::GridCell>& grid, const sbsvd::HyperParams& params,
                      Fixed lambda, unsigned jobs = 1);

}  // namespace newsgraph::eval
