#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dime/core/random.hpp"
#include "dime/heal/heal.hpp"
#include "dime/pomdp/model.hpp"
#include "dime/psinet/psinet.hpp"

namespace dime {

// Everything a planner may see. Ground truth (true F, hidden W) is not part
// of this on purpose.
struct PlanContext {
    const UncertainNetwork& net;
    const Belief& belief;
    int k = 1;
    int rounds = 1;
    int steps = 1;
    int round = 1;
    Deadline deadline;
};

struct PlanOutput {
    Action action;
    nlohmann::json details = nlohmann::json::object();
};

class Planner {
public:
    virtual ~Planner() = default;
    virtual std::string name() const = 0;
    virtual PlanOutput plan(const PlanContext& ctx, Rng& rng) = 0;
};

// Planner selection plus the knobs of every planner kind; unused knobs are
// ignored.
struct PlannerSpec {
    std::string kind = "heal";     // dc | random | greedy | psinet | heal | heal_t
    VoteVariant variant = VoteVariant::weighted;
    int n_instances = 64;          // Delta (psinet, heal)
    int sims_per_action = 256;     // eta (psinet)
    int candidate_pool = 50;       // M (psinet)
    int rollout_reps = 8;          // heal
    int greedy_sims = 64;          // greedy
    std::uint64_t partition_seed = 0;

    // "psinet-w", "heal-t", ...; used in reports.
    std::string label() const;
};

PlannerSpec parse_planner_spec(const nlohmann::json& j);
// Short form: "dc", "random", "greedy", "psinet-s|w|c", "heal", "heal-t".
PlannerSpec planner_spec_from_name(const std::string& name);
nlohmann::json to_json(const PlannerSpec& spec);

std::unique_ptr<Planner> make_planner(const PlannerSpec& spec);

// Top-K eligible nodes by degree centrality of the observation-updated
// network; ties go to the smaller id.
Action dc_plan(const UncertainNetwork& net, const Belief& b, int k);

// Uniform K-subset of the eligible nodes.
Action random_plan(const Belief& b, int k, Rng& rng);

struct GreedyResult {
    Action action;
    std::vector<double> gains;  // estimated marginal gain of each pick, in pick order
};

// Adds one node at a time, each maximising the Monte Carlo marginal gain in
// spread after `steps` cascade rounds. Simulation j draws a particle and a
// cascade stream shared by every candidate.
GreedyResult adaptive_greedy_plan(const UncertainNetwork& net, const Belief& b, int k, int steps, int n_sims,
                                  Rng& rng, const Deadline& deadline = {});

}  // namespace dime
