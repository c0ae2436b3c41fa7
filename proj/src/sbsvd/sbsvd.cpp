#include "newsgraph/sbsvd/sbsvd.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "newsgraph/core/errors.hpp"
#include "newsgraph/core/parallel.hpp"
#include "newsgraph/core/rng.hpp"

namespace newsgraph::sbsvd {

void HyperParams::validate() const {
  if (k < 1) throw DomainError("k must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be >= 0");
  if (epochs < 1) throw DomainError("epochs must be >= 1");
}

namespace {

struct Cell {
  std::uint32_t user;
  std::uint32_t edge;
  double vote;
  double stake;
};

bool diverged(const RealMatrix& m) {
  for (double x : m.values()) {
    if (!(std::abs(x) <= kDivergenceLimit)) return true;
  }
  return false;
}

double squared_norm(const RealMatrix& m) {
  double sum = 0.0;
  for (double x : m.values()) sum += x * x;
  return sum;
}

}  // namespace

double float_rsbe(const VoteMatrix& votes, const StakeLedger& ledger,
                  const RealMatrix& users, const RealMatrix& edges, double lambda) {
  const std::size_t k = users.cols();
  double approx = 0.0;
  for (const auto& e : votes.entries()) {
    auto u = users.row(e.user);
    auto v = edges.row(e.edge);
    double pred = 0.0;
    for (std::size_t f = 0; f < k; ++f) pred += u[f] * v[f];
    const double r = to_int(e.value) - pred;
    approx += ledger.stake(e.user).to_double() * r * r;
  }
  return approx + lambda * (squared_norm(users) + squared_norm(edges));
}

TrainReport train(const VoteMatrix& votes, const StakeLedger& ledger,
                  const HyperParams& params, Fixed lambda) {
  params.validate();
  if (ledger.num_users() != votes.num_users()) {
    throw DimensionMismatch("ledger user count does not match votes");
  }
  for (std::size_t i = 0; i < votes.num_users(); ++i) {
    if (votes.votes_of(i) == 0) {
      throw DomainError("user " + std::to_string(i) + " has no votes");
    }
  }

  const std::size_t k = static_cast<std::size_t>(params.k);
  Rng rng(params.seed);
  RealMatrix users(votes.num_users(), k);
  RealMatrix edges(votes.num_edges(), k);
  for (double& x : users.values()) x = rng.uniform(-0.1, 0.1);
  for (double& x : edges.values()) x = rng.uniform(-0.1, 0.1);

  std::vector<Cell> cells;
  cells.reserve(votes.num_votes());
  for (const auto& e : votes.entries()) {
    cells.push_back({e.user, e.edge, static_cast<double>(to_int(e.value)),
                     ledger.stake(e.user).to_double()});
  }

  const double gamma = params.gamma;
  const double beta = params.beta;
  const double lambda_f = lambda.to_double();
  TrainReport report;
  report.params = params;
  report.lambda = lambda;
  report.epoch_errors.reserve(static_cast<std::size_t>(params.epochs));

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(std::span<Cell>(cells));
    for (const Cell& c : cells) {
      double* u = &users(c.user, 0);
      double* v = &edges(c.edge, 0);
      double pred = 0.0;
      for (std::size_t f = 0; f < k; ++f) pred += u[f] * v[f];
      const double err = c.stake * (c.vote - pred);
      for (std::size_t f = 0; f < k; ++f) {
        const auto next = update_rule(u[f], v[f], err, gamma, beta);
        u[f] = next.user;
        v[f] = next.edge;
      }
    }
    if (diverged(users) || diverged(edges)) {
      throw DivergenceError(epoch + 1, "SBSVD diverged in epoch " + std::to_string(epoch + 1));
    }
    report.epoch_errors.push_back(float_rsbe(votes, ledger, users, edges, lambda_f));
  }

  report.factors = LatentFactors{quantize(users), quantize(edges)};
  report.rsbe = rsbe(votes, report.factors, ledger, lambda);
  return report;
}

std::vector<GridCell> parse_grid(std::string_view text) {
  std::vector<int> ks;
  std::vector<double> betas;
  auto parse_list = [](std::string_view list, auto& out) {
    std::size_t start = 0;
    while (start <= list.size()) {
      auto comma = list.find(',', start);
      if (comma == std::string_view::npos) comma = list.size();
      auto item = list.substr(start, comma - start);
      typename std::decay_t<decltype(out)>::value_type value{};
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
      if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
        throw DomainError("bad grid value '" + std::string(item) + "'");
      }
      out.push_back(value);
      start = comma + 1;
    }
  };
  std::size_t start = 0;
  while (start < text.size()) {
    auto semi = text.find(';', start);
    if (semi == std::string_view::npos) semi = text.size();
    auto part = text.substr(start, semi - start);
    if (part.starts_with("k=")) {
      parse_list(part.substr(2), ks);
    } else if (part.starts_with("beta=")) {
      parse_list(part.substr(5), betas);
    } else {
      throw DomainError("grid parts must be 'k=...' or 'beta=...'");
    }
    start = semi + 1;
  }
  if (ks.empty() || betas.empty()) throw DomainError("grid needs both k and beta values");
  std::vector<GridCell> grid;
  for (int k : ks) {
    for (double b : betas) grid.push_back({k, b});
  }
  return grid;
}

std::vector<GridCell> default_grid() {
  return parse_grid("k=6,8,10,12,14;beta=0,0.005,0.01,0.02");
}

GridResult grid_search(const VoteMatrix& votes, const StakeLedger& ledger, Fixed lambda,
                       const std::vector<GridCell>& grid, const HyperParams& base,
                       unsigned jobs) {
  if (grid.empty()) throw DomainError("grid must not be empty");
  GridResult result;
  result.table.resize(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    HyperParams p = base;
    p.k = grid[i].k;
    p.beta = grid[i].beta;
    result.table[i].cell = grid[i];
    try {
      result.table[i].report = train(votes, ledger, p, lambda);
    } catch (const DivergenceError& e) {
      result.table[i].failure = e.what();
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    const auto& o = result.table[i];
    if (!o.report) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = result.table[*best];
    const auto key = [](const GridOutcome& g) {
      return std::make_tuple(g.report->rsbe, g.cell.k, g.cell.beta);
    };
    if (key(o) < key(b)) best = i;
  }
  if (!best) throw DivergenceError(-1, "every grid cell diverged");
  result.best = *best;
  return result;
}

}  // namespace newsgraph::sbsvd
