#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "linpm/game.hpp"

namespace linpm {

// Builds a game from its JSON description:
//   {
//     "variant": "composite_cycle" | "full_information" | "feedback_graph" |
//                "linear_bandit" | "linear_dueling" | "ill_conditioned" |
//                "composite_graph" | "composite_bipartite" | "standard_bandit" | "custom",
//     "params": { ... variant parameters ... },
//     "explicit_features": [[...], ...],      // custom only
//     "explicit_observations": [[[...]]...],  // custom only, one matrix per action (rows)
//     "loss_space": {"kind": "linf_ball", "radius": 1.0}  // optional, variant default otherwise
//   }
// Graph parameters: {"k": 5, "edges": [[0, 1], ...], "self_loops": [0, ...]} or
// "all_self_loops": true.  Loss-space kinds: lp_ball (p, radius), l2_ball,
// linf_ball, polar_of_features, unit_box01.
// Throws InvalidInputError on malformed input or a game violating the loss-range bound.
Game game_from_json(const nlohmann::json& spec);
Game load_game(const std::string& path);

// Explicit (variant-independent) JSON description of a game; loadable by game_from_json.
nlohmann::json game_to_json(const Game& game);

nlohmann::json loss_space_to_json(const LossSpace& space);
LossSpace loss_space_from_json(const nlohmann::json& spec);

}  // namespace linpm
