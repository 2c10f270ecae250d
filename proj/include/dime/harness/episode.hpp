#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dime/harness/planners.hpp"

namespace dime {

struct RoundRecord {
    Action action;
    Observation obs;
    std::vector<NodeId> hidden_w;  // influenced nodes after the round (never shown to the planner)
    int reward = 0;
    double wall_ms = 0.0;          // planner time
    nlohmann::json details = nlohmann::json::object();
};

struct EpisodeRecord {
    std::string network;
    std::string planner;
    int k = 0, rounds = 0, steps = 0;
    std::uint64_t root_seed = 0;
    std::vector<std::uint8_t> true_f;
    std::vector<RoundRecord> history;
    int final_spread = 0;
    bool dnf = false;                 // planner ran out of its time budget
    std::optional<int> dnf_round;
    bool ground_truth_isolated = true;
};

struct EpisodeOptions {
    int n_particles = kDefaultParticles;
    std::optional<double> round_budget_s;  // per-round planner wall-time limit
    bool keep_details = false;
};

// Plays one DIME episode. true F is drawn once from u(.); each round the
// planner proposes an action from its belief, the environment reveals F on
// Theta(a) and the hidden W advances by `steps` cascade rounds on the true
// instance. Throws ValidationError for an invalid planner action (wrong size,
// repeated node). A BudgetExceeded from the planner ends the episode as DNF.
EpisodeRecord run_episode(const UncertainNetwork& net, Planner& planner, int k, int rounds, int steps,
                          std::uint64_t seed, const EpisodeOptions& opts = {});

nlohmann::json to_json(const EpisodeRecord& rec);
EpisodeRecord episode_from_json(const nlohmann::json& j);

}  // namespace dime
