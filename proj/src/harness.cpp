#include "linpm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "linpm/errors.hpp"
#include "linpm/rng.hpp"

namespace linpm {

namespace {

std::string format_eta_mode(const LearnerConfig& config) {
  if (config.adaptive) return "adaptive";
  std::ostringstream out;
  out << config.eta;
  return out.str();
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(value)) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw InvalidInputError("could not parse " + what + " from '" + text + "'");
  }
}

int parse_int(const std::string& text, const std::string& what) {
  try {
    size_t used = 0;
    const int value = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw InvalidInputError("could not parse " + what + " from '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

}  // namespace

Trace run(const Game& game, const LearnerConfig& config, const Environment& env, int horizon,
          std::uint64_t seed, std::uint64_t run_index) {
  if (horizon < 0) throw InvalidInputError("horizon must be nonnegative");
  if (env.kind == Environment::Kind::kFixedSequence &&
      static_cast<int>(env.sequence.size()) < horizon) {
    throw InvalidInputError("fixed loss sequence shorter than the horizon");
  }

  Learner learner(game, config);
  const CounterRng action_rng = make_rng(seed, run_index, RngStream::kActionSampling);
  const CounterRng noise_rng = make_rng(seed, run_index, RngStream::kEnvironmentNoise);

  Trace trace;
  trace.rows.reserve(static_cast<size_t>(horizon));
  trace.action_loss_totals = Eigen::VectorXd::Zero(game.k);
  trace.action_counts = Eigen::VectorXd::Zero(game.k);
  trace.game_name = game.name;
  trace.env_name = env.name;
  trace.eta_mode = format_eta_mode(config);
  trace.horizon = horizon;
  trace.seed = seed;
  const bool stochastic = env.kind == Environment::Kind::kStochasticParam;
  if (stochastic) {
    trace.theta = env.theta;
    trace.action_mean_costs = Eigen::VectorXd::Zero(game.k);
    for (int a = 0; a < game.k; ++a) {
      trace.action_mean_costs(a) = game.features[static_cast<size_t>(a)].dot(env.theta);
    }
  }

  // Online accumulators for the exponential-weights inequality audit.
  const std::vector<int>& support = learner.pareto_support();
  double sum_qy = 0.0;           // sum_t <q_t, y_t>
  double sum_eta_qy2 = 0.0;      // sum_t eta_t <q_t, y_t^2>
  Eigen::VectorXd sum_y = Eigen::VectorXd::Zero(game.k);  // sum_t y_t
  int violations = 0;

  for (int t = 0; t < horizon; ++t) {
    RoundPlan plan = learner.plan();
    const int action = Learner::sample(plan, action_rng.uniform(static_cast<std::uint64_t>(t)));
    const LossDraw draw = sample_loss(game, env, static_cast<std::uint64_t>(t), noise_rng);
    const Eigen::VectorXd signal = game.observations[static_cast<size_t>(action)].transpose() * draw.loss;
    const RoundOutcome outcome = learner.observe(plan, action, signal);

    TraceRow row;
    row.t = t + 1;
    row.action = action;
    row.realized_loss = game.features[static_cast<size_t>(action)].dot(draw.loss);
    row.eta = plan.eta;
    row.v = outcome.v;
    row.solver_iterations = plan.solver_iterations;
    row.violation = outcome.stability_violated;
    row.clipped = draw.clipped;
    trace.rows.push_back(row);

    for (int a = 0; a < game.k; ++a) {
      trace.action_loss_totals(a) += game.features[static_cast<size_t>(a)].dot(draw.loss);
    }
    trace.action_counts(action) += 1.0;
    trace.realized_loss_total += row.realized_loss;
    if (stochastic) trace.pseudo_loss_total += game.features[static_cast<size_t>(action)].dot(env.theta);

    const Eigen::VectorXd& y = outcome.y_hat;
    sum_qy += plan.q.vec().dot(y);
    sum_eta_qy2 += plan.eta * plan.q.vec().dot(y.cwiseProduct(y));
    sum_y += y;
    if (outcome.stability_violated) ++violations;
  }

  // Audit: for every candidate best action in the support, the cumulative
  // estimated regret must respect log(k*)/eta_final + sum eta_t <q_t, y_t^2>.
  const double k_star = static_cast<double>(std::max<size_t>(1, support.size()));
  const double bound = std::log(k_star) / learner.current_eta() + sum_eta_qy2;
  double worst = std::numeric_limits<double>::infinity();
  for (int a : support) worst = std::min(worst, bound - (sum_qy - sum_y(a)));
  trace.audit.worst_slack = support.empty() ? bound : worst;
  trace.audit.bound = bound;
  trace.audit.violations = violations;
  trace.audit.rounds = horizon;
  return trace;
}

double realized_regret(const Trace& trace) {
  if (trace.action_loss_totals.size() == 0) return 0.0;
  return trace.realized_loss_total - trace.action_loss_totals.minCoeff();
}

std::optional<double> pseudo_regret(const Trace& trace) {
  if (trace.theta.size() == 0 || trace.action_mean_costs.size() == 0) return std::nullopt;
  const double comparator = static_cast<double>(trace.horizon) * trace.action_mean_costs.minCoeff();
  return trace.pseudo_loss_total - comparator;
}

SweepResult sweep(const Game& game, const LearnerConfig& config,
                  const std::function<Environment(int horizon, int repeat)>& environments,
                  const std::vector<int>& horizons, int repeats, std::uint64_t seed, int threads) {
  if (horizons.size() < 3) throw InvalidInputError("a sweep needs at least three horizons");
  for (int T : horizons) {
    if (T <= 0) throw InvalidInputError("sweep horizons must be positive");
  }
  if (repeats < 5) throw InvalidInputError("a sweep needs at least five repeats per horizon");
  if (!environments) throw InvalidInputError("sweep requires an environment factory");

  const size_t tasks = horizons.size() * static_cast<size_t>(repeats);
  SweepResult result;
  result.points.resize(tasks);

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) {
      const size_t hi = i / static_cast<size_t>(repeats);
      const int rep = static_cast<int>(i % static_cast<size_t>(repeats));
      SweepPoint& point = result.points[i];
      point.horizon = horizons[hi];
      point.repeat = rep;
      point.seed = seed;
      try {
        const Environment env = environments(point.horizon, rep);
        const Trace trace =
            run(game, config, env, point.horizon, seed, static_cast<std::uint64_t>(rep));
        point.regret = realized_regret(trace);
        if (auto pseudo = pseudo_regret(trace)) {
          point.pseudo = *pseudo;
          point.has_pseudo = true;
        }
        point.violations = trace.audit.violations;
        point.audit_slack = trace.audit.worst_slack;
      } catch (const std::exception& e) {
        point.failed = true;
        point.error = e.what();
      }
    }
  };

  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(tasks)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // Per-horizon statistics over completed repeats (deterministic order).
  bool any_failed = false;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (size_t hi = 0; hi < horizons.size(); ++hi) {
    SweepHorizon stats;
    stats.horizon = horizons[hi];
    std::vector<double> regrets, pseudos;
    for (int rep = 0; rep < repeats; ++rep) {
      const SweepPoint& point = result.points[hi * static_cast<size_t>(repeats) + static_cast<size_t>(rep)];
      if (point.failed) {
        any_failed = true;
        continue;
      }
      regrets.push_back(point.regret);
      if (point.has_pseudo) pseudos.push_back(point.pseudo);
      result.total_violations += point.violations;
      result.total_rounds += point.horizon;
      worst_slack = std::min(worst_slack, point.audit_slack);
    }
    stats.completed = static_cast<int>(regrets.size());
    if (!regrets.empty()) {
      double mean = 0.0;
      for (double r : regrets) mean += r;
      mean /= static_cast<double>(regrets.size());
      stats.mean_regret = mean;
      if (regrets.size() > 1) {
        double ss = 0.0;
        for (double r : regrets) ss += (r - mean) * (r - mean);
        const double sd = std::sqrt(ss / static_cast<double>(regrets.size() - 1));
        stats.stderr_regret = sd / std::sqrt(static_cast<double>(regrets.size()));
      }
    }
    if (!pseudos.empty()) {
      double mean = 0.0;
      for (double r : pseudos) mean += r;
      stats.mean_pseudo = mean / static_cast<double>(pseudos.size());
    }
    result.horizons.push_back(stats);
  }
  result.worst_audit_slack = std::isfinite(worst_slack) ? worst_slack : 0.0;

  // Least-squares slope of log mean regret against log horizon.
  std::vector<double> xs, ys;
  for (const SweepHorizon& h : result.horizons) {
    if (h.completed > 0 && h.mean_regret > 0.0) {
      xs.push_back(std::log(static_cast<double>(h.horizon)));
      ys.push_back(std::log(h.mean_regret));
    }
  }
  if (any_failed || xs.size() < 3) {
    result.degenerate = true;
  } else {
    const size_t n = xs.size();
    double xbar = 0.0, ybar = 0.0;
    for (size_t i = 0; i < n; ++i) {
      xbar += xs[i];
      ybar += ys[i];
    }
    xbar /= static_cast<double>(n);
    ybar /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
      sxx += (xs[i] - xbar) * (xs[i] - xbar);
      sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (sxx <= 0.0) {
      result.degenerate = true;
    } else {
      result.slope = sxy / sxx;
      const double intercept = ybar - result.slope * xbar;
      double rss = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (intercept + result.slope * xs[i]);
        rss += r * r;
      }
      if (n > 2) {
        const double se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
        result.slope_half_width = 2.0 * se;
      }
    }
  }
  return result;
}

Environment environment_from_spec(const Game& game, const std::string& spec, int horizon,
                                  std::uint64_t seed) {
  const std::vector<std::string> parts = split(spec, ':');
  const std::string& head = parts[0];
  // Polar loss spaces define no projection, so noise there goes unclipped.
  const bool can_clip = game.loss_space.kind != LossSpace::Kind::kPolarOfFeatures;

  if (head == "zero") {
    const double sigma = parts.size() > 1 ? parse_double(parts[1], "noise level") : 0.0;
    return Environment::stochastic(game, Eigen::VectorXd::Zero(game.d), sigma,
                                   Environment::NoiseShape::kIsotropic, can_clip,
                                   sigma > 0.0 ? "noise(" + parts[1] + ")" : "zero");
  }

  if (head == "theta") {
    if (parts.size() < 2) throw InvalidInputError("theta spec needs coordinates: theta:v1,v2,...");
    const std::vector<std::string> coords = split(parts[1], ',');
    if (static_cast<int>(coords.size()) != game.d) {
      throw InvalidInputError("theta spec has " + std::to_string(coords.size()) +
                              " coordinates; game dimension is " + std::to_string(game.d));
    }
    Eigen::VectorXd theta(game.d);
    for (int i = 0; i < game.d; ++i) theta(i) = parse_double(coords[static_cast<size_t>(i)], "theta coordinate");
    const double sigma = parts.size() > 2 ? parse_double(parts[2], "noise level") : 0.1;
    return Environment::stochastic(game, theta, sigma, Environment::NoiseShape::kIsotropic,
                                   can_clip, "theta");
  }

  if (head == "fixed") {
    if (parts.size() < 2 || parts[1].empty()) throw InvalidInputError("fixed spec needs a file: fixed:<path>");
    std::ifstream in(parts[1]);
    if (!in) throw InvalidInputError("cannot open loss file: " + parts[1]);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const std::exception& e) {
      throw InvalidInputError(std::string("loss file is not valid JSON: ") + e.what());
    }
    if (!doc.contains("losses") || !doc["losses"].is_array()) {
      throw InvalidInputError("loss file must contain a 'losses' array");
    }
    std::vector<Eigen::VectorXd> losses;
    for (const auto& row : doc["losses"]) {
      if (!row.is_array()) throw InvalidInputError("each loss must be an array of numbers");
      Eigen::VectorXd loss(row.size());
      for (size_t i = 0; i < row.size(); ++i) {
        if (!row[i].is_number()) throw InvalidInputError("each loss must be an array of numbers");
        loss(static_cast<Eigen::Index>(i)) = row[i].get<double>();
      }
      losses.push_back(std::move(loss));
    }
    return Environment::fixed_sequence(game, std::move(losses), "fixed");
  }

  if (head == "hard_local" || head == "hard_global" || head == "hard_hopeless") {
    const HardKind kind = head == "hard_local"    ? HardKind::kLocal
                          : head == "hard_global" ? HardKind::kGlobal
                                                  : HardKind::kHopeless;
    double delta;
    if (parts.size() > 1 && parts[1] != "auto" && !parts[1].empty()) {
      delta = parse_double(parts[1], "separation");
    } else {
      // Horizon-matched separation: the scaling under which the difficulty of
      // the instance family stays balanced as the horizon grows.
      const double exponent = kind == HardKind::kLocal ? -0.5 : -1.0 / 3.0;
      delta = std::min(1.0, std::pow(static_cast<double>(std::max(1, horizon)), exponent));
    }
    const double sigma = parts.size() > 2 ? parse_double(parts[2], "noise level") : 0.1;
    const HardPair pair = neighbor_hard_pair(game, kind, delta, seed);
    const bool side_a = make_rng(seed, 0, RngStream::kInstanceSelection).uniform(1) < 0.5;
    std::ostringstream name;
    name << head << "(pair=" << pair.a << "," << pair.b << ",delta=" << delta
         << ",side=" << (side_a ? "a" : "b") << ")";
    return Environment::stochastic(game, side_a ? pair.theta_a : pair.theta_b, sigma,
                                   Environment::NoiseShape::kIsotropic, can_clip, name.str());
  }

  if (head == "ill") {
    if (game.d != game.k) {
      throw InvalidInputError("ill spec requires a game whose loss dimension equals its action count");
    }
    const int arm = parts.size() > 1 && !parts[1].empty() ? parse_int(parts[1], "arm index") : 0;
    if (arm < 0 || arm >= game.k) throw InvalidInputError("ill spec arm index out of range");
    double delta = 0.25;
    if (parts.size() > 2 && !parts[2].empty()) {
      if (parts[2] == "auto") {
        delta = std::min(0.25, std::pow(static_cast<double>(std::max(1, horizon)), -1.0 / 3.0));
      } else {
        delta = parse_double(parts[2], "separation");
      }
    }
    const double epsilon = parts.size() > 3 && !parts[3].empty() ? parse_double(parts[3], "blend") : 0.5;
    const double sigma = parts.size() > 4 && !parts[4].empty() ? parse_double(parts[4], "noise level") : 0.1;
    const IllConditionedFamily family = ill_conditioned_family(game.k, epsilon, delta);
    std::ostringstream name;
    name << "ill(arm=" << arm << ",delta=" << delta << ",eps=" << epsilon << ")";
    return Environment::stochastic(game, family.thetas[static_cast<size_t>(arm)], sigma,
                                   Environment::NoiseShape::kRankOneOnes, can_clip, name.str());
  }

  throw InvalidInputError("unknown environment spec: " + spec +
                          " (expected zero|theta|fixed|hard_local|hard_global|hard_hopeless|ill)");
}

void write_sweep_csv(const SweepResult& result, const Game& game, const std::string& verdict,
                     const std::string& eta_mode, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open sweep output file: " + path);
  out << "game,class,eta_mode,T,seed,regret,pseudo_regret,violations\n";
  for (const SweepPoint& point : result.points) {
    out << game.name << ',' << verdict << ',' << eta_mode << ',' << point.horizon << ','
        << point.repeat;
    if (point.failed) {
      out << ",,,0\n";
      continue;
    }
    char buffer[128];
    std::snprintf(buffer, sizeof(buffer), ",%.10g,", point.regret);
    out << buffer;
    if (point.has_pseudo) {
      std::snprintf(buffer, sizeof(buffer), "%.10g", point.pseudo);
      out << buffer;
    }
    out << ',' << point.violations << '\n';
  }
}

std::string sweep_summary_json(const SweepResult& result, const Game& game,
                               const std::string& verdict, const std::string& eta_mode) {
  nlohmann::json doc;
  doc["game"] = game.name;
  doc["class"] = verdict;
  doc["eta_mode"] = eta_mode;
  doc["horizons"] = nlohmann::json::array();
  for (const SweepHorizon& h : result.horizons) {
    doc["horizons"].push_back({{"T", h.horizon},
                               {"completed", h.completed},
                               {"mean_regret", h.mean_regret},
                               {"stderr_regret", h.stderr_regret},
                               {"mean_pseudo_regret", h.mean_pseudo}});
  }
  if (result.degenerate) {
    doc["slope"] = nullptr;
    doc["slope_half_width"] = nullptr;
  } else {
    doc["slope"] = result.slope;
    doc["slope_half_width"] = result.slope_half_width;
  }
  doc["degenerate"] = result.degenerate;
  doc["worst_audit_slack"] = result.worst_audit_slack;
  doc["total_violations"] = result.total_violations;
  doc["total_rounds"] = result.total_rounds;
  int failed = 0;
  for (const SweepPoint& point : result.points) {
    if (point.failed) ++failed;
  }
  doc["failed_runs"] = failed;
  return doc.dump(2);
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open trace output file: " + path);
  out << "t,action,loss,eta,v,solver_iters,violation,clipped\n";
  char buffer[256];
  for (const TraceRow& row : trace.rows) {
    std::snprintf(buffer, sizeof(buffer), "%d,%d,%.10g,%.10g,%.10g,%d,%d,%d\n", row.t, row.action,
                  row.realized_loss, row.eta, row.v, row.solver_iterations, row.violation ? 1 : 0,
                  row.clipped ? 1 : 0);
    out << buffer;
  }
}

}  // namespace linpm
