#include "newsgraph/eval/sweep.hpp"

#include <cstdio>
#include <sstream>

#include "newsgraph/core/errors.hpp"

namespace newsgraph::eval {

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

std::vector<SweepPoint> standard_points(double noise_variance, std::uint64_t seed) {
  std::vector<SweepPoint> points;
  for (double ap : {0.1, 0.3, 0.5, 0.7}) {
    const int max_stake = ap > 0.6 ? 2 : 5;
    for (int as = 1; as <= max_stake; ++as) {
      points.push_back({noise_variance, ap, Fixed::from_int(as), seed});
    }
  }
  return points;
}

SweepResult run_sweep(const synth::SynthConfig& base, const synth::IndexedGraph& graph,
                      const std::vector<SweepPoint>& points,
                      const std::vector<sbsvd::GridCell>& grid, const sbsvd::HyperParams& params,
                      Fixed lambda, unsigned jobs) {
  SweepResult result;
  for (const SweepPoint& p : points) {
    SweepRow row;
    row.point = p;
    synth::SynthConfig config = base;
    config.noise_variance = p.noise_variance;
    config.adversary_proportion = p.adversary_proportion;
    config.adversary_stake = p.adversary_stake;
    config.seed = p.seed;
    const auto data = synth::generate_dataset(config, graph);
    row.users = data.votes.num_users();
    row.adversaries = data.truth.num_adversaries();
    try {
      const auto search = sbsvd::grid_search(data.votes, data.stakes, lambda, grid, params, jobs);
      for (const auto& outcome : search.table) {
        row.cells.emplace_back(outcome.cell, outcome.report
                                                 ? std::optional<Fixed>(outcome.report->rsbe)
                                                 : std::nullopt);
      }
      const auto& best = search.best_report();
      row.best = search.table[search.best].cell;
      row.rsbe = best.rsbe;
      row.ratio = error_ratio(data.votes, best.factors, data.truth.adversary);
    } catch (const DivergenceError& e) {
      row.failed = true;
      row.failure = e.what();
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out << "noise_variance,ap,as,users,adversaries,best_k,best_beta,rsbe_raw,rsbe,er,"
         "rmse_honest,rmse_adversary,status\n";
  for (const auto& r : rows) {
    out << num(r.point.noise_variance) << ',' << num(r.point.adversary_proportion) << ','
        << num(r.point.adversary_stake.to_double()) << ',' << r.users << ',' << r.adversaries
        << ',';
    if (r.failed) {
      out << ",,,,,,,failed\n";
      continue;
    }
    out << r.best.k << ',' << num(r.best.beta) << ',' << r.rsbe.raw() << ','
        << num(r.rsbe.to_double()) << ',' << num(r.ratio.er) << ',' << num(r.ratio.rmse_honest)
        << ',' << num(r.ratio.rmse_adversary) << ',' << to_string(r.ratio.status) << '\n';
  }
  return out.str();
}

std::string SweepResult::grid_csv() const {
  std::ostringstream out;
  out << "noise_variance,ap,as,k,beta,rsbe_raw\n";
  for (const auto& r : rows) {
    for (const auto& [cell, rsbe] : r.cells) {
      out << num(r.point.noise_variance) << ',' << num(r.point.adversary_proportion) << ','
          << num(r.point.adversary_stake.to_double()) << ',' << cell.k << ',' << num(cell.beta)
          << ',' << (rsbe ? std::to_string(rsbe->raw()) : "diverged") << '\n';
    }
  }
  return out.str();
}

std::string SweepResult::to_dat() const {
  std::ostringstream out;
  const SweepRow* previous = nullptr;
  for (const auto& r : rows) {
    if (!previous || previous->point.noise_variance != r.point.noise_variance ||
        previous->point.adversary_proportion != r.point.adversary_proportion) {
      if (previous) out << "\n\n";
      out << "# noise_variance=" << num(r.point.noise_variance)
          << " ap=" << num(r.point.adversary_proportion) << "\n# as er best_k best_beta\n";
    }
    out << num(r.point.adversary_stake.to_double()) << ' '
        << (r.failed ? std::string("nan") : num(r.ratio.er)) << ' ' << r.best.k << ' '
        << num(r.best.beta) << '\n';
    previous = &r;
  }
  return out.str();
}

}  // namespace newsgraph::eval
