#include <cmath>

#include "doctest.h"
#include "newsgraph/core/errors.hpp"
#include "newsgraph/core/rng.hpp"
#include "newsgraph/eval/cost.hpp"
#include "newsgraph/eval/measures.hpp"
#include "newsgraph/eval/sweep.hpp"

using namespace newsgraph;
using namespace newsgraph::eval;

namespace {

struct Instance {
  VoteMatrix votes;
  LatentFactors factors;
};

Instance random_instance(std::size_t users, std::size_t edges, Rng& rng) {
  std::vector<VoteEntry> entries;
  for (std::uint32_t i = 0; i < users; ++i) {
    for (std::uint32_t j = 0; j < edges; ++j) {
      if (j % users == i % edges || rng.uniform() < 0.4) {
        entries.push_back({i, j, vote_from_int(static_cast<int>(rng.below(3)) - 1)});
      }
    }
  }
  Instance x{VoteMatrix::compact(users, edges, entries).matrix, {}};
  x.factors.users = FixedMatrix(users, 3);
  x.factors.edges = FixedMatrix(x.votes.num_edges(), 3);
  for (Fixed& v : x.factors.users.values()) v = Fixed::quantize(rng.uniform(-1.0, 1.0));
  for (Fixed& v : x.factors.edges.values()) v = Fixed::quantize(rng.uniform(-1.0, 1.0));
  return x;
}

double dense_rmse(const Instance& x, const std::vector<std::size_t>& set) {
  double sum = 0.0;
  for (std::size_t i : set) {
    for (std::size_t j = 0; j < x.votes.num_edges(); ++j) {
      const auto r = x.votes.at(i, j);
      if (!r) continue;
      double p = 0.0;
      for (std::size_t f = 0; f < 3; ++f) {
        p += x.factors.users(i, f).to_double() * x.factors.edges(j, f).to_double();
      }
      sum += (to_int(*r) - p) * (to_int(*r) - p);
    }
  }
  return std::sqrt(sum / static_cast<double>(set.size()));
}

int lg(std::size_t n) {
  int d = 0;
  std::size_t p = 1;
  while (p < n) {
    p *= 2;
    ++d;
  }
  return d;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("rmse divides by the number of users") {
    Rng rng(31);
    const auto x = random_instance(12, 15, rng);
    const std::vector<std::size_t> some{0, 3, 4, 11};
    CHECK(rmse(some, x.votes, x.factors) == doctest::Approx(dense_rmse(x, some)).epsilon(1e-9));
    CHECK_THROWS_AS(rmse(std::vector<std::size_t>{}, x.votes, x.factors), DomainError);

    std::vector<bool> adversary(12, false);
    adversary[3] = adversary[7] = true;
    const auto er = error_ratio(x.votes, x.factors, adversary);
    CHECK(er.status == ErStatus::Defined);
    const std::vector<std::size_t> adv{3, 7}, hon{0, 1, 2, 4, 5, 6, 8, 9, 10, 11};
    CHECK(er.er == doctest::Approx(dense_rmse(x, adv) / dense_rmse(x, hon)).epsilon(1e-9));
  }

  TEST_CASE("error ratio edge cases") {
    Rng rng(2);
    const auto x = random_instance(4, 4, rng);
    CHECK(error_ratio(x.votes, x.factors, std::vector<bool>(4, false)).status ==
          ErStatus::NoAdversaries);
    CHECK(error_ratio(x.votes, x.factors, std::vector<bool>(4, true)).status == ErStatus::NoHonest);

    VoteMatrix votes(2, 1, {{0, 0, VoteValue::Neutral}, {1, 0, VoteValue::Positive}});
    LatentFactors zero{FixedMatrix(2, 1), FixedMatrix(1, 1)};
    const auto perfect = error_ratio(votes, zero, {false, true});
    CHECK(perfect.status == ErStatus::PerfectHonestFit);
    CHECK(std::isinf(perfect.er));
    CHECK_THROWS(error_ratio(votes, zero, {false}));
  }

  TEST_CASE("cost formulas") {
    const auto c = cost_report(2406, 22885, 10);
    const int lu = lg(2406), le = lg(22885);
    CHECK(c.padded_users == 4096);
    CHECK(c.padded_edges == 32768);
    CHECK(c.log_leaves == lu + le);
    CHECK(c.traverse_rounds == 27);
    CHECK(c.total_steps == 2 + 2 * 27);
    CHECK(c.traverse_bytes == static_cast<std::size_t>(2 * 27 * 64));
    CHECK(c.commitment_bytes == 192);
    CHECK(c.fraud_settle_bytes == static_cast<std::size_t>(128 * (lu + le) + (lu + le + 10) * 64));
    CHECK(c.availability_settle_bytes_u == 128u * 2406 + 32);
    CHECK(c.availability_settle_bytes_v == 128u * 22885 + 32);
    CHECK(c.wire_traverse_bytes == static_cast<std::size_t>(2 * 27 * 40));
    CHECK(c.wire_commitment_bytes == 120);

    const auto small = cost_report(16, 16, 4);
    CHECK(small.traverse_rounds == 8);
    CHECK(small.traverse_bytes == 1024);
    CHECK(cost_report(1, 1, 1).traverse_rounds == 1);  // one row padded to two leaves
    CHECK_THROWS_AS(cost_report(0, 3, 1), DomainError);
  }

  TEST_CASE("live game rounds equal the padded depth") {
    for (auto [u, e] : {std::pair<std::size_t, std::size_t>{16, 16}, {5, 9}, {3, 2}}) {
      const auto live = measure_live_game(u, e, 3, 7);
      CHECK(live.depth == ssamt::Shape{u, e}.depth());
      CHECK(live.rounds == live.depth);
      CHECK(live.prover_bytes == static_cast<std::size_t>(live.depth) * 2 * ssamt::Node::kWireSize);
      CHECK(live.solver_punished);
    }
  }

  TEST_CASE("standard sweep points") {
    const auto pts = standard_points(0.0, 1);
    CHECK(pts.size() == 17);
    for (const auto& p : pts) {
      CHECK(p.adversary_proportion * p.adversary_stake.to_double() <=
            (1.0 - p.adversary_proportion) * 5.0 + 1e-12);
    }
  }

  TEST_CASE("sweep output formats") {
    const auto base = synth::preset("desk");
    const auto graph = synth::load_or_generate_graph(base.graph);
    const std::vector<SweepPoint> pts{{0.0, 0.1, Fixed::from_int(1), 1},
                                      {0.0, 0.1, Fixed::from_int(2), 1}};
    const sbsvd::HyperParams params{.epochs = 20, .seed = 1};
    const auto r = run_sweep(base, graph, pts, {{6, 0.0}, {8, 0.01}}, params, Fixed::quantize(0.1));
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].cells.size() == 2);
    const auto csv = r.to_csv();
    CHECK(csv.rfind("noise_variance,ap,as,users,adversaries,best_k,best_beta,rsbe_raw", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    const auto grid = r.grid_csv();
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 5);
    const auto dat = r.to_dat();
    CHECK(dat.find("# noise_variance=0 ap=0.1") != std::string::npos);
    const auto again = run_sweep(base, graph, pts, {{6, 0.0}, {8, 0.01}}, params,
                                 Fixed::quantize(0.1));
    CHECK(again.to_csv() == csv);
  }
}
