// newsgraph command-line driver.
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 scenario fault,
// 1 any other error (I/O, malformed files).

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "newsgraph/core/errors.hpp"
#include "newsgraph/core/io.hpp"
#include "newsgraph/eval/cost.hpp"
#include "newsgraph/eval/measures.hpp"
#include "newsgraph/eval/sweep.hpp"
#include "newsgraph/protocol/scenario.hpp"
#include "newsgraph/sbsvd/factor_io.hpp"
#include "newsgraph/synth/bundle.hpp"

namespace fs = std::filesystem;
using namespace newsgraph;

namespace {

constexpr int kUsage = 2;
constexpr int kNumerical = 3;
constexpr int kScenario = 4;

struct Options {
  std::uint64_t seed = 0;
  double lambda = 0.1;
  double gamma = 0.005;
  int epochs = 1000;
  int k = 10;
  double beta = 0.005;
  std::string grid;
  std::string preset = "desk";
  std::string out;
  unsigned jobs = 1;
  double noise = 0.0;
  std::vector<double> ap;
  std::vector<double> as;
  std::string dataset;
  std::string scenario;
  bool transcript = false;
  std::size_t users = 16;
  std::size_t edges = 16;
  std::optional<std::size_t> row;
  std::optional<std::size_t> col;
  std::string fault = "corrupt-em-cell";
  bool quiet = false;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void emit(const Options& o, const std::string& name, const std::string& content) {
  if (o.out.empty()) {
    std::cout << content;
    return;
  }
  fs::create_directories(o.out);
  write_text_file(fs::path(o.out) / name, content);
}

sbsvd::HyperParams hyper(const Options& o) {
  sbsvd::HyperParams p{.k = o.k, .beta = o.beta, .gamma = o.gamma, .epochs = o.epochs,
                       .seed = o.seed};
  p.validate();
  return p;
}

int cmd_synth(const Options& o) {
  if (o.out.empty()) throw UsageError("synth needs --out");
  auto config = synth::preset(o.preset);
  config.noise_variance = o.noise;
  config.adversary_proportion = o.ap.empty() ? 0.0 : o.ap.front();
  config.adversary_stake = Fixed::quantize(o.as.empty() ? 5.0 : o.as.front());
  config.seed = o.seed;
  config.validate();
  const auto data = synth::generate_dataset(config);
  synth::write_bundle(o.out, data);
  std::cout << "nodes " << data.graph.num_nodes() << "\nmulti_edges " << data.graph.num_multi_edges()
            << "\nsimple_edges " << data.graph.num_simple_edges() << "\nvoted_edges "
            << data.votes.num_edges() << "\nvotes " << data.votes.num_votes() << "\nusers "
            << data.votes.num_users() << "\nadversaries " << data.truth.num_adversaries() << "\n";
  return 0;
}

int cmd_train(const Options& o) {
  if (o.dataset.empty()) throw UsageError("train needs a dataset directory");
  if (!fs::is_directory(o.dataset)) throw UsageError("no dataset directory at " + o.dataset);
  const auto bundle = synth::read_bundle(o.dataset);
  const Fixed lambda = Fixed::quantize(o.lambda);
  auto params = hyper(o);
  std::vector<sbsvd::GridCell> grid =
      o.grid.empty() ? std::vector<sbsvd::GridCell>{{o.k, o.beta}} : sbsvd::parse_grid(o.grid);
  const auto search = sbsvd::grid_search(bundle.votes, bundle.stakes, lambda, grid, params, o.jobs);
  const auto& best = search.best_report();
  const auto ratio = eval::error_ratio(bundle.votes, best.factors, bundle.adversary);

  if (!o.out.empty()) {
    fs::create_directories(o.out);
    sbsvd::write_factors(fs::path(o.out) / "users.bin", best.factors.users);
    sbsvd::write_factors(fs::path(o.out) / "edges.bin", best.factors.edges);
    write_text_file(fs::path(o.out) / "report.json", sbsvd::report_to_json(best));
  }
  std::cout << "k " << best.params.k << "\nbeta " << fmt(best.params.beta) << "\nrsbe_raw "
            << best.rsbe.raw() << "\nrsbe " << fmt(best.rsbe.to_double()) << "\ner_status "
            << eval::to_string(ratio.status) << "\ner " << fmt(ratio.er) << "\n";
  return 0;
}

int cmd_sweep(const Options& o) {
  auto base = synth::preset(o.preset);
  const auto graph = synth::load_or_generate_graph(base.graph);
  std::vector<eval::SweepPoint> points;
  for (const auto& p : eval::standard_points(o.noise, o.seed)) {
    const bool ap_ok = o.ap.empty() || std::find(o.ap.begin(), o.ap.end(),
                                                 p.adversary_proportion) != o.ap.end();
    const bool as_ok = o.as.empty() || std::find(o.as.begin(), o.as.end(),
                                                 p.adversary_stake.to_double()) != o.as.end();
    if (ap_ok && as_ok) points.push_back(p);
  }
  if (points.empty()) throw UsageError("no sweep point matches --ap/--as");
  const auto grid = o.grid.empty() ? sbsvd::default_grid() : sbsvd::parse_grid(o.grid);
  const auto result = eval::run_sweep(base, graph, points, grid, hyper(o),
                                      Fixed::quantize(o.lambda), o.jobs);
  if (o.out.empty()) {
    std::cout << result.to_csv();
  } else {
    emit(o, "sweep.csv", result.to_csv());
    emit(o, "grid.csv", result.grid_csv());
    emit(o, "sweep.dat", result.to_dat());
  }
  for (const auto& row : result.rows) {
    if (row.failed) return kNumerical;
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  if (o.scenario.empty()) throw UsageError("simulate needs a scenario file");
  if (!fs::is_regular_file(o.scenario)) throw UsageError("no scenario file at " + o.scenario);
  const auto setup = protocol::load_scenario(o.scenario);
  const auto report = protocol::run_cycle(setup);
  emit(o, "report.json", protocol::report_to_json(report, o.transcript));
  return 0;
}

int cmd_fraud_demo(const Options& o) {
  auto setup = eval::random_fraud_instance(o.users, o.edges, static_cast<std::size_t>(o.k), o.seed);
  setup.validators = {{"validator", {}}};
  protocol::SolverScript solver;
  protocol::AttesterScript attester;
  if (o.fault == "corrupt-em-cell") {
    solver.kind = protocol::SolverScript::Kind::CorruptEmCell;
    Rng rng(derive_seed(o.seed, "fraud-demo"));
    solver.row = o.row.value_or(rng.below(o.users));
    solver.col = o.col.value_or(rng.below(o.edges));
  } else {
    try {
      attester.kind = protocol::parse_attester_kind(o.fault);
    } catch (const protocol::ProtocolError& e) {
      throw protocol::ScenarioError(e.what());
    }
  }
  setup.solvers = {{"solver", solver}};
  setup.attesters = {{"attester/0", attester}, {"attester/1", {}}, {"attester/2", {}}};
  const auto report = protocol::run_cycle(setup);

  for (const auto& line : report.transcript) std::cout << line << "\n";
  std::cout << "tree_depth " << ssamt::Shape{o.users, o.edges}.depth() << "\n";
  for (const auto& c : report.challenges) {
    std::cout << "challenge " << c.id << " " << protocol::to_string(c.kind) << " " << c.challenger
              << " -> " << c.defendant << " rounds " << c.traverse_rounds << " verdict "
              << (c.upheld ? "upheld" : "dismissed") << "\n";
  }
  for (const auto& who : report.punished) std::cout << "punished " << who << "\n";
  if (report.punished.count("solver")) std::cout << "verdict solver punished\n";
  std::cout << "outcome " << protocol::to_string(report.outcome) << "\n";
  return 0;
}

int cmd_cost(const Options& o) {
  const auto c = eval::cost_report(o.users, o.edges, static_cast<std::size_t>(o.k));
  nlohmann::ordered_json j{{"users", c.users},
                           {"edges", c.edges},
                           {"k", c.k},
                           {"padded_users", c.padded_users},
                           {"padded_edges", c.padded_edges},
                           {"leaves", c.leaves},
                           {"log_leaves", c.log_leaves},
                           {"traverse_rounds", c.traverse_rounds},
                           {"total_steps", c.total_steps},
                           {"traverse_bytes", c.traverse_bytes},
                           {"commitment_bytes", c.commitment_bytes},
                           {"fraud_settle_bytes", c.fraud_settle_bytes},
                           {"availability_settle_bytes_u", c.availability_settle_bytes_u},
                           {"availability_settle_bytes_v", c.availability_settle_bytes_v},
                           {"wire_traverse_bytes", c.wire_traverse_bytes},
                           {"wire_commitment_bytes", c.wire_commitment_bytes}};
  emit(o, "cost.json", j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stake-weighted news graph factorization and protocol simulator"};
  app.require_subcommand(1);
  Options o;

  auto add_training = [&](CLI::App* c) {
    c->add_option("--lambda", o.lambda, "RSBE regularization weight")->capture_default_str();
    c->add_option("--gamma", o.gamma, "Learning rate")->capture_default_str();
    c->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
    c->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
    c->add_option("--grid", o.grid, "Grid, e.g. \"k=6,8;beta=0,0.005\"");
  };

  auto* synth_cmd = app.add_subcommand("synth", "Generate a dataset bundle");
  synth_cmd->add_option("--seed", o.seed, "Dataset seed")->required();
  synth_cmd->add_option("--preset", o.preset, "paper or desk")->capture_default_str();
  synth_cmd->add_option("--noise", o.noise, "Vote noise variance")->capture_default_str();
  synth_cmd->add_option("--ap", o.ap, "Adversary proportion")->expected(1);
  synth_cmd->add_option("--as", o.as, "Adversary stake")->expected(1);
  synth_cmd->add_option("--out", o.out, "Bundle directory");

  auto* train_cmd = app.add_subcommand("train", "Factorize a dataset bundle");
  train_cmd->add_option("dataset", o.dataset, "Bundle directory");
  train_cmd->add_option("--seed", o.seed, "Initialization seed")->required();
  train_cmd->add_option("--k", o.k, "Latent rank")->capture_default_str();
  train_cmd->add_option("--beta", o.beta, "Regularization variable")->capture_default_str();
  train_cmd->add_option("--out", o.out, "Directory for factors and report");
  add_training(train_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "ER over adversary proportion and stake");
  sweep_cmd->add_option("--seed", o.seed, "Dataset and training seed")->required();
  sweep_cmd->add_option("--preset", o.preset, "paper or desk")->capture_default_str();
  sweep_cmd->add_option("--noise", o.noise, "Vote noise variance")->capture_default_str();
  sweep_cmd->add_option("--ap", o.ap, "Restrict to these adversary proportions");
  sweep_cmd->add_option("--as", o.as, "Restrict to these adversary stakes");
  sweep_cmd->add_option("--out", o.out, "Directory for sweep.csv, grid.csv, sweep.dat");
  add_training(sweep_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "Run one protocol cycle from a scenario");
  sim_cmd->add_option("scenario", o.scenario, "Scenario JSON file");
  sim_cmd->add_option("--out", o.out, "Directory for report.json");
  sim_cmd->add_flag("--transcript", o.transcript, "Include the judge transcript");

  auto* demo_cmd = app.add_subcommand("fraud-demo", "Play one fraud or availability game");
  demo_cmd->add_option("--seed", o.seed, "Instance seed")->capture_default_str();
  demo_cmd->add_option("--users", o.users, "Users")->capture_default_str();
  demo_cmd->add_option("--edges", o.edges, "Edges")->capture_default_str();
  demo_cmd->add_option("--k", o.k, "Latent rank")->capture_default_str();
  demo_cmd->add_option("--fault", o.fault,
                       "corrupt-em-cell, withhold-data, wrong-salt, garbage-chunks or stall")
      ->capture_default_str();
  demo_cmd->add_option("--row", o.row, "Corrupted user row");
  demo_cmd->add_option("--col", o.col, "Corrupted edge column");

  auto* cost_cmd = app.add_subcommand("cost", "Round and byte costs of the games");
  cost_cmd->add_option("--users", o.users, "Users")->capture_default_str();
  cost_cmd->add_option("--edges", o.edges, "Edges")->capture_default_str();
  cost_cmd->add_option("--k", o.k, "Latent rank")->capture_default_str();
  cost_cmd->add_option("--out", o.out, "Directory for cost.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(o);
    if (*train_cmd) return cmd_train(o);
    if (*sweep_cmd) return cmd_sweep(o);
    if (*sim_cmd) return cmd_simulate(o);
    if (*demo_cmd) return cmd_fraud_demo(o);
    if (*cost_cmd) return cmd_cost(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const protocol::ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kScenario;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const ArithmeticOverflow& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
