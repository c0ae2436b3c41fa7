#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "newsgraph/core/errors.hpp"
#include "newsgraph/core/rng.hpp"
#include "newsgraph/sbsvd/factor_io.hpp"
#include "newsgraph/sbsvd/sbsvd.hpp"
#include "newsgraph/synth/votes.hpp"

using namespace newsgraph;
using namespace newsgraph::sbsvd;

namespace {

// re = s (r - u.v)^2 + lambda (|u|^2 + |v|^2) for one cell.
double regularized_error(const std::vector<double>& u, const std::vector<double>& v, double s,
                         double r, double lambda) {
  double p = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t f = 0; f < u.size(); ++f) {
    p += u[f] * v[f];
    nu += u[f] * u[f];
    nv += v[f] * v[f];
  }
  return s * (r - p) * (r - p) + lambda * (nu + nv);
}

VoteMatrix rank_one_votes(std::size_t n, Rng& rng) {
  std::vector<int> a(n), b(n);
  for (auto& x : a) x = rng.below(2) ? 1 : -1;
  for (auto& x : b) x = static_cast<int>(rng.below(3)) - 1;
  std::vector<VoteEntry> entries;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) entries.push_back({i, j, vote_from_int(a[i] * b[j])});
  }
  return VoteMatrix(n, n, entries);
}

}  // namespace

TEST_SUITE("sbsvd") {
  TEST_CASE("update rule hand cases") {
    const auto same = update_rule(0.3, -0.7, 0.0, 0.5, 0.0);
    CHECK(same.user == 0.3);
    CHECK(same.edge == -0.7);
    const auto step = update_rule(1.0, 1.0, 1.0, 0.1, 0.0);
    CHECK(step.user == doctest::Approx(1.1));
    CHECK(step.edge == doctest::Approx(1.1));
    // both sides use the pre-update values
    const auto cross = update_rule(2.0, 3.0, 1.0, 0.1, 0.0);
    CHECK(cross.user == doctest::Approx(2.3));
    CHECK(cross.edge == doctest::Approx(3.2));
  }

  TEST_CASE("update rule is a gradient step on the regularized cell error") {
    Rng rng(17);
    const double h = 1e-6;
    for (int n = 0; n < 1000; ++n) {
      const std::size_t k = 1 + rng.below(6);
      std::vector<double> u(k), v(k);
      for (auto& x : u) x = rng.uniform(-1.0, 1.0);
      for (auto& x : v) x = rng.uniform(-1.0, 1.0);
      const double s = rng.uniform(0.1, 5.0);
      const double r = static_cast<double>(rng.below(3)) - 1.0;
      const double lambda = rng.uniform(0.0, 0.1);
      const double gamma = 0.005;
      double p = 0.0;
      for (std::size_t f = 0; f < k; ++f) p += u[f] * v[f];
      const double e = s * (r - p);
      const std::size_t f = rng.below(k);

      const auto next = update_rule(u[f], v[f], e, gamma, lambda);
      auto up = u, um = u, vp = v, vm = v;
      up[f] += h;
      um[f] -= h;
      vp[f] += h;
      vm[f] -= h;
      const double du = (regularized_error(up, v, s, r, lambda) - regularized_error(um, v, s, r, lambda)) / (2 * h);
      const double dv = (regularized_error(u, vp, s, r, lambda) - regularized_error(u, vm, s, r, lambda)) / (2 * h);
      // step = -(gamma / 2) * gradient when beta = lambda
      const double su = (next.user - u[f]) / gamma, sv = (next.edge - v[f]) / gamma;
      CHECK(su == doctest::Approx(-0.5 * du).epsilon(1e-4).scale(1e-6));
      CHECK(sv == doctest::Approx(-0.5 * dv).epsilon(1e-4).scale(1e-6));
    }
  }

  TEST_CASE("scalar residual shrinks monotonically") {
    double u = 0.4, v = 0.3;
    const double r = 1.0, s = 2.0, gamma = 0.05;
    double last = std::abs(r - u * v);
    for (int n = 0; n < 200; ++n) {
      const auto next = update_rule(u, v, s * (r - u * v), gamma, 0.0);
      u = next.user;
      v = next.edge;
      const double now = std::abs(r - u * v);
      CHECK(now <= last);
      last = now;
    }
    CHECK(last < 1e-3);
  }

  TEST_CASE("hyperparameter validation") {
    CHECK_THROWS_AS((HyperParams{.k = 0}.validate()), DomainError);
    CHECK_THROWS_AS((HyperParams{.gamma = 0.0}.validate()), DomainError);
    CHECK_THROWS_AS((HyperParams{.beta = -1.0}.validate()), DomainError);
    CHECK_THROWS_AS((HyperParams{.epochs = 0}.validate()), DomainError);
  }

  TEST_CASE("rank-one noiseless votes are fit") {
    Rng rng(3);
    const auto votes = rank_one_votes(20, rng);
    const auto ledger = StakeLedger::uniform(20, Fixed::from_int(5));
    const HyperParams p{.k = 2, .beta = 0.0, .gamma = 0.005, .epochs = 1000, .seed = 1};
    const auto report = train(votes, ledger, p, Fixed::quantize(0.01));
    CHECK(report.rsbe.to_double() <= 0.01 * static_cast<double>(votes.num_votes()));
    CHECK(report.epoch_errors.size() == 1000);
    for (double x : report.epoch_errors) CHECK(std::isfinite(x));
    CHECK(report.rsbe == rsbe(votes, report.factors, ledger, Fixed::quantize(0.01)));
    const double rel = std::abs(report.rsbe.to_double() - report.final_float_rsbe()) /
                       report.final_float_rsbe();
    CHECK(rel < 1e-3);

    const auto again = train(votes, ledger, p, Fixed::quantize(0.01));
    CHECK(again.factors == report.factors);
    CHECK(again.rsbe == report.rsbe);
    CHECK(again.epoch_errors == report.epoch_errors);
  }

  TEST_CASE("training preconditions and divergence") {
    VoteMatrix votes(2, 1, {{0, 0, VoteValue::Positive}});
    CHECK_THROWS_AS(train(votes, StakeLedger::uniform(2, Fixed::one()), {}, Fixed{}), DomainError);

    Rng rng(1);
    const auto full = rank_one_votes(10, rng);
    const HyperParams wild{.k = 4, .beta = 0.0, .gamma = 5.0, .epochs = 50, .seed = 1};
    CHECK_THROWS_AS(train(full, StakeLedger::uniform(10, Fixed::from_int(5)), wild, Fixed{}),
                    DivergenceError);
  }

  TEST_CASE("grid parsing") {
    const auto g = parse_grid("k=6,8;beta=0,0.005");
    REQUIRE(g.size() == 4);
    CHECK(g[0] == GridCell{6, 0.0});
    CHECK(g[1] == GridCell{6, 0.005});
    CHECK(g[3] == GridCell{8, 0.005});
    CHECK(default_grid().size() == 20);
    CHECK(default_grid().front() == GridCell{6, 0.0});
    CHECK(default_grid().back() == GridCell{14, 0.02});
    CHECK_THROWS_AS(parse_grid("k=6"), DomainError);
    CHECK_THROWS_AS(parse_grid("k=x;beta=0"), DomainError);
    CHECK_THROWS_AS(parse_grid("q=1;beta=0"), DomainError);
  }

  TEST_CASE("grid search picks the lowest RSBE") {
    auto config = synth::preset("desk");
    config.noise_variance = 0.1;
    config.adversary_proportion = 0.1;
    config.adversary_stake = Fixed::from_int(3);
    config.seed = 2;
    const auto data = synth::generate_dataset(config);
    const HyperParams base{.epochs = 60, .seed = 1};
    const Fixed lambda = Fixed::quantize(0.1);

    const auto one = grid_search(data.votes, data.stakes, lambda, {{8, 0.01}}, base);
    CHECK(one.best == 0);
    CHECK(one.best_report().params.k == 8);

    const std::vector<GridCell> grid{{6, 0.0}, {10, 0.005}, {6, 0.0}, {14, 0.02}};
    const auto result = grid_search(data.votes, data.stakes, lambda, grid, base, 2);
    REQUIRE(result.table.size() == 4);
    CHECK(result.table[0].report->rsbe == result.table[2].report->rsbe);
    CHECK(result.table[0].report->factors == result.table[2].report->factors);
    for (const auto& cell : result.table) {
      REQUIRE(cell.report);
      CHECK(result.best_report().rsbe <= cell.report->rsbe);
    }
    CHECK(result.best != 2);  // ties go to the first occurrence
    CHECK_THROWS_AS(grid_search(data.votes, data.stakes, lambda, {}, base), DomainError);
  }

  TEST_CASE("factor dumps round-trip") {
    Rng rng(12);
    FixedMatrix m(3, 4);
    for (Fixed& x : m.values()) x = Fixed::from_raw(static_cast<std::int64_t>(rng.next_u64()));
    const auto bytes = encode_factors(m);
    CHECK(bytes.size() == 16 + 8 * 12);
    CHECK(bytes.substr(0, 8) == "NGFIXQ32");
    CHECK(decode_factors(bytes) == m);
    CHECK_THROWS_AS(decode_factors(bytes.substr(0, 20)), FormatError);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_factors(bad), FormatError);

    const auto path = std::filesystem::temp_directory_path() / "newsgraph_factor_test.bin";
    write_factors(path, m);
    CHECK(read_factors(path) == m);
    std::filesystem::remove(path);
  }
}
