// Command-line interface: classify games, compute their constants, run a
// single learning loop, or sweep horizons and fit the regret growth rate.
// Exit codes: 0 success, 2 invalid configuration or input, 3 infeasible
// learning rate, 1 unexpected failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "linpm/constants.hpp"
#include "linpm/errors.hpp"
#include "linpm/harness.hpp"
#include "linpm/json_io.hpp"
#include "linpm/learner.hpp"
#include "linpm/observability.hpp"

namespace {

using nlohmann::json;

json classify_report_json(const linpm::Game& game, const linpm::ObservabilityReport& report) {
  json doc;
  doc["game"] = game.name;
  doc["kind"] = linpm::game_kind_name(game.kind);
  doc["actions"] = game.k;
  doc["dimension"] = game.d;
  doc["verdict"] = linpm::observability_name(report.verdict);
  doc["pareto"] = report.pareto;
  doc["pareto_representatives"] = report.pareto_representatives;
  doc["neighbor_pairs"] = json::array();
  for (const auto& [a, b] : report.neighbor_pairs) doc["neighbor_pairs"].push_back({a, b});
  doc["pairs"] = json::array();
  for (const linpm::PairWitness& w : report.witnesses) {
    doc["pairs"].push_back({{"a", w.a},
                            {"b", w.b},
                            {"neighbors", w.neighbors},
                            {"cell_margin", w.cell_margin},
                            {"global_residual", w.global_residual},
                            {"local_residual", w.local_residual}});
  }
  const linpm::BoundednessReport bounded = linpm::validate(game);
  doc["boundedness"] = {{"max_pair_gap", bounded.max_pair_gap}, {"pass", bounded.pass}};
  return doc;
}

json subset_json(const linpm::SubsetIndexResult& r) {
  return {{"value", r.value}, {"subset", r.subset}, {"exact", r.exact}};
}

json constants_json(const linpm::Game& game, const linpm::ConstantsReport& report) {
  json doc;
  doc["game"] = game.name;
  doc["verdict"] = linpm::observability_name(report.verdict);
  doc["beta_2_glo"] = report.beta_2_glo ? json(*report.beta_2_glo) : json(nullptr);
  doc["beta_glo"] = report.beta_glo ? json(*report.beta_glo) : json(nullptr);
  if (report.beta_loc) {
    doc["beta_loc"] = {{"value", report.beta_loc->value},
                       {"exact", report.beta_loc->exact},
                       {"orderings", report.beta_loc->orderings},
                       {"max_support", report.beta_loc->max_support}};
  } else {
    doc["beta_loc"] = nullptr;
  }
  doc["w_star"] = subset_json(report.w_star);
  doc["u_star"] = subset_json(report.u_star);
  doc["omega"] = report.omega;
  if (report.graph) {
    doc["graph"] = {{"independence_number", report.graph->independence_number},
                    {"total_domination_number", report.graph->total_domination_number}};
  } else {
    doc["graph"] = nullptr;
  }
  return doc;
}

linpm::LearnerConfig make_config(const std::string& eta, double delta, double L, double B,
                                 int solver_iters) {
  linpm::LearnerConfig config;
  if (eta == "adaptive") {
    config.adaptive = true;
  } else {
    try {
      size_t used = 0;
      config.eta = std::stod(eta, &used);
      if (used != eta.size()) throw std::invalid_argument(eta);
    } catch (const std::exception&) {
      throw linpm::InvalidInputError("--eta must be a positive number or 'adaptive'");
    }
  }
  config.delta = delta;
  config.L = L;
  config.B = B;
  if (solver_iters > 0) config.solver.max_iters = solver_iters;
  return config;
}

std::vector<int> parse_horizons(const std::string& text) {
  std::vector<int> horizons;
  std::string current;
  auto flush = [&]() {
    if (current.empty()) return;
    try {
      size_t used = 0;
      horizons.push_back(std::stoi(current, &used));
      if (used != current.size()) throw std::invalid_argument(current);
    } catch (const std::exception&) {
      throw linpm::InvalidInputError("--horizons must be a comma-separated list of integers");
    }
    current.clear();
  };
  for (char c : text) {
    if (c == ',') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return horizons;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"linear partial monitoring: classification, constants, and regret experiments"};
  app.require_subcommand(1);

  // classify
  std::string classify_game;
  CLI::App* classify = app.add_subcommand("classify", "observability class of a game");
  classify->add_option("game", classify_game, "game description (JSON)")->required();

  // constants
  std::string constants_game, constants_mode = "auto";
  CLI::App* constants = app.add_subcommand("constants", "instance-dependent constants of a game");
  constants->add_option("game", constants_game, "game description (JSON)")->required();
  constants->add_option("--mode", constants_mode, "exact|greedy|sampled|auto (default auto)")
      ->check(CLI::IsMember({"exact", "greedy", "sampled", "auto"}));

  // shared run/sweep options
  std::string run_game, run_env = "zero", run_eta = "adaptive", run_out;
  double run_delta = 0.01, run_L = 0.0, run_B = 0.0;
  int run_T = 1000, run_solver_iters = 0;
  std::uint64_t run_seed = 1;

  CLI::App* run_cmd = app.add_subcommand("run", "single learning run, optionally tracing to CSV");
  run_cmd->add_option("--game", run_game, "game description (JSON)")->required();
  run_cmd->add_option("--env", run_env,
                      "environment spec: zero[:sigma] | theta:v1,..[:sigma] | fixed:<path> | "
                      "hard_local[:delta|auto[:sigma]] | hard_global[:..] | hard_hopeless[:..] | "
                      "ill:<arm>[:delta[:eps[:sigma]]]");
  run_cmd->add_option("--eta", run_eta, "learning rate or 'adaptive'");
  run_cmd->add_option("--delta", run_delta, "uniform mixing weight in (0, 1/2]");
  run_cmd->add_option("--L", run_L, "scale parameter (0 = derived bound)");
  run_cmd->add_option("--B", run_B, "adaptive rate cap (0 = derived bound)");
  run_cmd->add_option("--T", run_T, "horizon")->required();
  run_cmd->add_option("--seed", run_seed, "random seed");
  run_cmd->add_option("--out", run_out, "trace CSV path");
  run_cmd->add_option("--solver-iters", run_solver_iters, "per-round solver iteration budget");

  std::string sweep_game, sweep_env = "zero", sweep_eta = "adaptive", sweep_out;
  std::string sweep_horizons = "1000,4000,16000";
  double sweep_delta = 0.01, sweep_L = 0.0, sweep_B = 0.0;
  int sweep_repeats = 10, sweep_threads = 0, sweep_solver_iters = 0;
  std::uint64_t sweep_seed = 1;

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "regret growth across horizons");
  sweep_cmd->add_option("--game", sweep_game, "game description (JSON)")->required();
  sweep_cmd->add_option("--env", sweep_env, "environment spec (see 'run'); 'auto' separations scale with T");
  sweep_cmd->add_option("--eta", sweep_eta, "learning rate or 'adaptive'");
  sweep_cmd->add_option("--delta", sweep_delta, "uniform mixing weight in (0, 1/2]");
  sweep_cmd->add_option("--L", sweep_L, "scale parameter (0 = derived bound)");
  sweep_cmd->add_option("--B", sweep_B, "adaptive rate cap (0 = derived bound)");
  sweep_cmd->add_option("--horizons", sweep_horizons, "comma-separated horizons (>= 3)");
  sweep_cmd->add_option("--repeats", sweep_repeats, "repeats per horizon (>= 5)");
  sweep_cmd->add_option("--seed", sweep_seed, "random seed");
  sweep_cmd->add_option("--threads", sweep_threads, "worker threads (0 = hardware)");
  sweep_cmd->add_option("--out", sweep_out, "per-run CSV path");
  sweep_cmd->add_option("--solver-iters", sweep_solver_iters, "per-round solver iteration budget");

  CLI11_PARSE(app, argc, argv);

  if (classify->parsed()) {
    const linpm::Game game = linpm::load_game(classify_game);
    const linpm::ObservabilityReport report = linpm::classify(game);
    std::cout << classify_report_json(game, report).dump(2) << "\n";
    return 0;
  }

  if (constants->parsed()) {
    const linpm::Game game = linpm::load_game(constants_game);
    std::optional<linpm::SubsetSearchMode> subset_mode;
    std::optional<linpm::BetaLocMode> beta_mode;
    if (constants_mode == "exact") {
      subset_mode = linpm::SubsetSearchMode::kExhaustive;
      beta_mode = linpm::BetaLocMode::kEnumerate;
    } else if (constants_mode == "greedy") {
      subset_mode = linpm::SubsetSearchMode::kGreedy;
    } else if (constants_mode == "sampled") {
      subset_mode = linpm::SubsetSearchMode::kGreedy;
      beta_mode = linpm::BetaLocMode::kSampled;
    }
    const linpm::ConstantsReport report = linpm::compute_constants(game, subset_mode, beta_mode);
    std::cout << constants_json(game, report).dump(2) << "\n";
    return 0;
  }

  if (run_cmd->parsed()) {
    const linpm::Game game = linpm::load_game(run_game);
    const linpm::LearnerConfig config =
        make_config(run_eta, run_delta, run_L, run_B, run_solver_iters);
    const linpm::Environment env =
        linpm::environment_from_spec(game, run_env, run_T, run_seed);
    const linpm::Trace trace = linpm::run(game, config, env, run_T, run_seed);
    if (!run_out.empty()) linpm::write_trace_csv(trace, run_out);

    json doc;
    doc["game"] = game.name;
    doc["env"] = trace.env_name;
    doc["eta_mode"] = trace.eta_mode;
    doc["T"] = trace.horizon;
    doc["seed"] = trace.seed;
    doc["realized_regret"] = linpm::realized_regret(trace);
    if (auto pseudo = linpm::pseudo_regret(trace)) {
      doc["pseudo_regret"] = *pseudo;
    } else {
      doc["pseudo_regret"] = nullptr;
    }
    doc["violations"] = trace.audit.violations;
    doc["audit_slack"] = trace.audit.worst_slack;
    if (!trace.rows.empty()) doc["final_eta"] = trace.rows.back().eta;
    int clipped = 0;
    for (const linpm::TraceRow& row : trace.rows) clipped += row.clipped ? 1 : 0;
    doc["clipped_rounds"] = clipped;
    if (!run_out.empty()) doc["trace"] = run_out;
    std::cout << doc.dump(2) << "\n";
    return 0;
  }

  // sweep
  const linpm::Game game = linpm::load_game(sweep_game);
  const linpm::LearnerConfig config =
      make_config(sweep_eta, sweep_delta, sweep_L, sweep_B, sweep_solver_iters);
  const std::vector<int> horizons = parse_horizons(sweep_horizons);
  const std::string env_spec = sweep_env;
  const std::uint64_t seed = sweep_seed;
  auto env_factory = [&game, env_spec, seed](int horizon, int repeat) {
    // Distinct instance draws per repeat, deterministic in (seed, repeat).
    const std::uint64_t env_seed =
        seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(repeat + 1);
    return linpm::environment_from_spec(game, env_spec, horizon, env_seed);
  };
  const linpm::SweepResult result =
      linpm::sweep(game, config, env_factory, horizons, sweep_repeats, sweep_seed, sweep_threads);
  const std::string verdict = linpm::observability_name(linpm::classify(game).verdict);
  const std::string eta_mode = config.adaptive ? "adaptive" : sweep_eta;
  if (!sweep_out.empty()) linpm::write_sweep_csv(result, game, verdict, eta_mode, sweep_out);
  std::cout << linpm::sweep_summary_json(result, game, verdict, eta_mode) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const linpm::InvalidInputError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const linpm::NoWitnessError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const linpm::EtaTooLargeError& e) {
    std::cerr << "infeasible learning rate: " << e.what()
              << " (smallest achievable constraint value " << e.min_constraint_value
              << "; lower eta or L so that 2 / (eta L) exceeds it)\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
