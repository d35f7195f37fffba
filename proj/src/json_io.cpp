#include "linpm/json_io.hpp"

#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "linpm/errors.hpp"

namespace linpm {

namespace {

using nlohmann::json;

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw InvalidInputError("game JSON: expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

// Matrices are stored row-major: an array of rows.
Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw InvalidInputError("game JSON: expected an array of rows");
  const size_t rows = j.size();
  const size_t cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw InvalidInputError("game JSON: ragged matrix");
    for (size_t c = 0; c < cols; ++c) m(static_cast<int>(r), static_cast<int>(c)) = j[r][c].get<double>();
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Graph graph_from_json(const json& j) {
  if (!j.contains("k")) throw InvalidInputError("game JSON: graph needs a vertex count 'k'");
  const int k = j.at("k").get<int>();
  std::vector<std::pair<int, int>> edges;
  if (j.contains("edges")) {
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw InvalidInputError("game JSON: edge must be a pair");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  }
  std::vector<int> loops;
  if (j.value("all_self_loops", false)) {
    for (int a = 0; a < k; ++a) loops.push_back(a);
  } else if (j.contains("self_loops")) {
    for (const auto& v : j.at("self_loops")) loops.push_back(v.get<int>());
  }
  return Graph::from_edges(k, edges, loops);
}

std::vector<Eigen::VectorXd> feature_list_from_json(const json& j) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& row : j) out.push_back(vector_from_json(row));
  return out;
}

}  // namespace

LossSpace loss_space_from_json(const json& spec) {
  const std::string kind = spec.value("kind", "linf_ball");
  if (kind == "lp_ball") {
    double p;
    if (spec.contains("p") && spec.at("p").is_string()) {
      if (spec.at("p").get<std::string>() != "inf")
        throw InvalidInputError("loss_space JSON: string p must be \"inf\"");
      p = std::numeric_limits<double>::infinity();
    } else {
      p = spec.value("p", 2.0);
    }
    return LossSpace::lp_ball(p, spec.value("radius", 1.0));
  }
  if (kind == "l2_ball") return LossSpace::l2_ball(spec.value("radius", 1.0));
  if (kind == "linf_ball") return LossSpace::linf_ball(spec.value("radius", 1.0));
  if (kind == "polar_of_features") return LossSpace::polar_of_features();
  if (kind == "unit_box01") return LossSpace::unit_box01();
  throw InvalidInputError("loss_space JSON: unknown kind '" + kind + "'");
}

json loss_space_to_json(const LossSpace& space) {
  json j;
  switch (space.kind) {
    case LossSpace::Kind::kLpBall:
      if (std::isinf(space.p)) {
        j["kind"] = "linf_ball";
      } else if (space.p == 2.0) {
        j["kind"] = "l2_ball";
      } else {
        j["kind"] = "lp_ball";
        j["p"] = space.p;
      }
      j["radius"] = space.radius;
      break;
    case LossSpace::Kind::kPolarOfFeatures:
      j["kind"] = "polar_of_features";
      break;
    case LossSpace::Kind::kUnitBox01:
      j["kind"] = "unit_box01";
      break;
  }
  return j;
}

Game game_from_json(const json& spec) {
  if (!spec.contains("variant")) throw InvalidInputError("game JSON: missing 'variant'");
  const std::string variant = spec.at("variant").get<std::string>();
  const json params = spec.value("params", json::object());
  const bool has_space = spec.contains("loss_space");
  const LossSpace space = has_space ? loss_space_from_json(spec.at("loss_space")) : LossSpace();

  if ((spec.contains("explicit_features") || spec.contains("explicit_observations")) &&
      variant != "custom") {
    throw InvalidInputError("game JSON: explicit matrices are only valid with variant 'custom'");
  }

  Game game;
  if (variant == "full_information") {
    game = has_space ? make_full_information(params.at("k").get<int>(), space)
                     : make_full_information(params.at("k").get<int>());
  } else if (variant == "feedback_graph") {
    const Graph g = graph_from_json(params.at("graph"));
    game = has_space ? make_feedback_graph(g, space) : make_feedback_graph(g);
  } else if (variant == "linear_bandit") {
    const auto feats = feature_list_from_json(params.at("features"));
    game = has_space ? make_linear_bandit(feats, space) : make_linear_bandit(feats);
  } else if (variant == "linear_dueling") {
    const auto base = feature_list_from_json(params.at("base_features"));
    game = has_space ? make_linear_dueling(base, space) : make_linear_dueling(base);
  } else if (variant == "ill_conditioned") {
    const int k = params.at("k").get<int>();
    const double eps = params.at("epsilon").get<double>();
    game = has_space ? make_ill_conditioned(k, eps, space) : make_ill_conditioned(k, eps);
  } else if (variant == "composite_graph") {
    const Graph g = graph_from_json(params.at("graph"));
    game = has_space ? make_composite_graph(g, space) : make_composite_graph(g);
  } else if (variant == "composite_cycle") {
    game = make_composite_cycle(params.at("k").get<int>());
  } else if (variant == "composite_bipartite") {
    game = make_composite_bipartite(params.at("k").get<int>());
  } else if (variant == "standard_bandit") {
    game = make_standard_bandit(params.at("k").get<int>());
  } else if (variant == "custom") {
    if (!spec.contains("explicit_features") || !spec.contains("explicit_observations"))
      throw InvalidInputError("game JSON: custom games need explicit_features and explicit_observations");
    std::vector<Eigen::VectorXd> features = feature_list_from_json(spec.at("explicit_features"));
    std::vector<Eigen::MatrixXd> observations;
    for (const auto& m : spec.at("explicit_observations")) observations.push_back(matrix_from_json(m));
    game = make_custom(std::move(features), std::move(observations),
                       has_space ? space : LossSpace::linf_ball(1.0));
  } else {
    throw InvalidInputError("game JSON: unknown variant '" + variant + "'");
  }

  if (spec.contains("name")) game.name = spec.at("name").get<std::string>();
  const BoundednessReport report = validate(game);
  if (!report.pass) {
    throw InvalidInputError("game JSON: loss range bound violated (max pair gap " +
                            std::to_string(report.max_pair_gap) + " > 2)");
  }
  return game;
}

Game load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open game file: " + path);
  json spec;
  try {
    in >> spec;
  } catch (const json::exception& e) {
    throw InvalidInputError("game JSON parse error in " + path + ": " + e.what());
  }
  return game_from_json(spec);
}

json game_to_json(const Game& game) {
  json j;
  j["variant"] = "custom";
  j["name"] = game.name;
  j["explicit_features"] = json::array();
  j["explicit_observations"] = json::array();
  for (int a = 0; a < game.k; ++a) {
    json feat = json::array();
    for (int i = 0; i < game.d; ++i) feat.push_back(game.features[static_cast<size_t>(a)](i));
    j["explicit_features"].push_back(feat);
    j["explicit_observations"].push_back(matrix_to_json(game.observations[static_cast<size_t>(a)]));
  }
  j["loss_space"] = loss_space_to_json(game.loss_space);
  return j;
}

}  // namespace linpm
