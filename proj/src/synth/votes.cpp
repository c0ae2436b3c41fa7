#include "newsgraph/synth/votes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "newsgraph/core/errors.hpp"
#include "newsgraph/core/rng.hpp"

namespace newsgraph::synth {

IndexedGraph load_or_generate_graph(const GraphSource& source) {
  MultiGraph g = source.file ? read_edge_list(*source.file) : random_typing_graph(source.generator);
  g = largest_component(g);
  if (!source.file && source.nodes > 0) {
    g = trim(g, source.nodes, source.simple_edges, source.multi_edges);
  }
  return index_edges(std::move(g));
}

std::filesystem::path reference_graph_path() {
  return std::filesystem::path(NEWSGRAPH_DATA_DIR) / "reference_graph.csv";
}

void SynthConfig::validate() const {
  if (latent_rank < 1) throw DomainError("latent rank must be at least 1");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw DomainError("noise variance must be a non-negative number");
  }
  if (!(adversary_proportion >= 0.0 && adversary_proportion < 1.0)) {
    throw DomainError("adversary proportion must be in [0, 1)");
  }
  const Fixed cap = StakeLedger::max_stake();
  if (adversary_stake <= Fixed{} || adversary_stake > cap) {
    throw DomainError("adversary stake must be in (0, 5]");
  }
  if (honest_stake <= Fixed{} || honest_stake > cap) throw DomainError("honest stake must be in (0, 5]");
  const double ap = adversary_proportion;
  if (ap * adversary_stake.to_double() > (1.0 - ap) * honest_stake.to_double() + 1e-12) {
    throw DomainError("adversaries would hold more than half of the expected stake");
  }
  if (!(mean_votes >= 10.0) || !std::isfinite(mean_votes)) {
    throw DomainError("mean votes per user must be at least 10");
  }
}

SynthConfig preset(std::string_view name) {
  SynthConfig c;
  if (name == "paper") {
    c.graph.file = reference_graph_path();
  } else if (name == "desk") {
    c.graph.generator = RtgParams{.words = 10000, .keys = 5, .beta = 0.6, .q = 0.4, .seed = 7};
    c.graph.nodes = 800;
    c.graph.simple_edges = 1200;
    c.graph.multi_edges = 2600;
  } else {
    throw DomainError("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

double GroundTruth::low_rank(std::size_t user, std::size_t simple_edge) const {
  const auto u = a.row(user);
  const auto v = b.row(simple_edge);
  return std::inner_product(u.begin(), u.end(), v.begin(), 0.0) / max_abs;
}

std::size_t GroundTruth::num_adversaries() const {
  return static_cast<std::size_t>(std::count(adversary.begin(), adversary.end(), true));
}

std::size_t user_count(std::size_t multi_edges, double mean_votes) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(multi_edges) / mean_votes));
}

namespace {

RealMatrix normal_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  RealMatrix m(rows, cols);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

}  // namespace

Dataset generate_dataset(const SynthConfig& config, const IndexedGraph& graph) {
  config.validate();
  const std::size_t num_edges = graph.num_simple_edges();
  const std::size_t num_users = user_count(graph.num_multi_edges(), config.mean_votes);
  const auto rank = static_cast<std::size_t>(config.latent_rank);

  Dataset d;
  d.config = config;
  d.graph = graph;

  Rng factor_rng(derive_seed(config.seed, "low-rank"));
  d.truth.a = normal_matrix(num_users, rank, factor_rng);
  d.truth.b = normal_matrix(num_edges, rank, factor_rng);
  double max_abs = 0.0;
  for (std::size_t i = 0; i < num_users; ++i) {
    const auto u = d.truth.a.row(i);
    for (std::size_t j = 0; j < num_edges; ++j) {
      const auto v = d.truth.b.row(j);
      max_abs = std::max(max_abs, std::abs(std::inner_product(u.begin(), u.end(), v.begin(), 0.0)));
    }
  }
  if (max_abs == 0.0) throw DomainError("degenerate low-rank matrix");
  d.truth.max_abs = max_abs;

  Rng adversary_rng(derive_seed(config.seed, "adversaries"));
  d.truth.adversary.resize(num_users);
  for (std::size_t i = 0; i < num_users; ++i) {
    d.truth.adversary[i] = adversary_rng.uniform() < config.adversary_proportion;
  }

  Rng count_rng(derive_seed(config.seed, "vote-counts"));
  d.assigned.resize(num_users);
  for (auto& c : d.assigned) c = 10 + count_rng.poisson(config.mean_votes - 10.0);

  // Hand out the shuffled multigraph edges in order, reshuffling whenever
  // the supply runs out.
  Rng assign_rng(derive_seed(config.seed, "assignment"));
  Rng noise_rng(derive_seed(config.seed, "noise"));
  Rng adversary_vote_rng(derive_seed(config.seed, "adversary-votes"));
  const double noise_sd = std::sqrt(config.noise_variance);
  std::vector<std::uint32_t> deck(graph.num_multi_edges());
  std::iota(deck.begin(), deck.end(), 0u);
  assign_rng.shuffle(std::span<std::uint32_t>(deck));
  std::size_t cursor = 0;

  std::vector<VoteEntry> entries;
  entries.reserve(std::accumulate(d.assigned.begin(), d.assigned.end(), std::size_t{0}));
  for (std::size_t i = 0; i < num_users; ++i) {
    for (std::size_t n = 0; n < d.assigned[i]; ++n) {
      if (cursor == deck.size()) {
        assign_rng.shuffle(std::span<std::uint32_t>(deck));
        cursor = 0;
      }
      const std::uint32_t edge = graph.edge_index[deck[cursor++]];
      int vote = 0;
      if (d.truth.adversary[i]) {
        vote = static_cast<int>(adversary_vote_rng.below(3)) - 1;
      } else {
        const double noisy = d.truth.low_rank(i, edge) + noise_sd * noise_rng.normal();
        vote = static_cast<int>(std::clamp(std::nearbyint(noisy), -1.0, 1.0));
      }
      entries.push_back({static_cast<std::uint32_t>(i), edge, vote_from_int(vote)});
    }
  }
  auto compacted = VoteMatrix::compact(num_users, num_edges, std::move(entries));
  d.votes = std::move(compacted.matrix);
  d.edge_origin = std::move(compacted.edge_origin);

  d.stakes = StakeLedger(num_users);
  for (std::size_t i = 0; i < num_users; ++i) {
    d.stakes.set_stake(i, d.truth.adversary[i] ? config.adversary_stake : config.honest_stake);
  }
  return d;
}

Dataset generate_dataset(const SynthConfig& config) {
  config.validate();
  return generate_dataset(config, load_or_generate_graph(config.graph));
}

}  // namespace newsgraph::synth
