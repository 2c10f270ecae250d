#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dime/core/random.hpp"
#include "dime/diffusion/cascade.hpp"
#include "dime/netcore/partition.hpp"
#include "dime/pomdp/model.hpp"

namespace dime {

enum class PartitionMode { k_parts, t_parts };

// One partition of the observation-updated network, solved on its own.
struct IntermediatePomdp {
    int part_index = 0;
    std::vector<NodeId> nodes;     // local id -> global id, ascending
    UncertainNetwork subnetwork;   // induced on `nodes`, cross edges dropped
    int budget = 1;                // picks this round
};

// Partitions apply_knowledge(net, b.known) into n_parts and builds one
// intermediate POMDP per part with the given per-part budget. Throws
// ValidationError when a part has fewer nodes than the budget.
std::vector<IntermediatePomdp> build_intermediate_pomdps(const UncertainNetwork& net, const Belief& b, int n_parts,
                                                         int budget, double imbalance_tolerance = 0.05,
                                                         std::uint64_t partition_seed = 0);

IntermediatePomdp make_intermediate(const UncertainNetwork& updated, int part_index, std::vector<NodeId> nodes,
                                    int budget);

// Particle influence vectors restricted to a node subset (local ids).
std::vector<NodeMask> restrict_particles(const Belief& b, std::span<const NodeId> nodes);

struct AlphaList {
    int instance_index = 0;
    std::vector<double> values;  // long-term reward per shared action
};

// Rollout schedule inside one intermediate POMDP: `prefix` nodes are taken
// together with each evaluated action this round, then future_budgets[r]
// greedy picks happen in each later round, every round followed by `steps`
// cascade rounds.
struct RolloutSchedule {
    Action prefix;
    std::vector<int> future_budgets;
    int steps = 1;
};

// alpha_i = mean over `reps` rollouts on the instance: start from a random
// particle, take prefix + actions[i], then follow the greedy policy (pick the
// un-influenced node with the largest expected one-round gain
// 1 + sum of p over present out-edges to un-influenced nodes). Rollout r
// uses the same particle and stream for every action.
AlphaList alpha_list(const CascadeModel& instance, const UncertainNetwork& subnet,
                     std::span<const std::uint8_t> kept, std::span<const NodeMask> particles,
                     std::span<const Action> actions, const RolloutSchedule& schedule, int reps, std::uint64_t seed);

struct TaspConfig {
    int n_instances = 64;   // Delta
    int rollout_reps = 8;
    bool exhaustive = false;  // enumerate all 2^|E_u| instances instead of sampling (|E_u| <= 16)
};

struct TaspResult {
    Action action;
    std::vector<Action> actions;
    std::vector<double> expected;                    // r_i per action
    std::vector<std::vector<std::uint8_t>> instances;  // distinct instances used
    std::vector<double> weights;                     // normalised P(delta), parallel to instances
    std::vector<AlphaList> alphas;                   // parallel to instances
};

// r_i = sum_delta P^(delta) alpha^delta_i over the distinct instances drawn,
// with P^ the instance probabilities normalised over that set; returns the
// argmax (ties: lexicographic).
TaspResult tasp_solve(const IntermediatePomdp& ip, std::span<const NodeMask> particles,
                      std::span<const Action> actions, const RolloutSchedule& schedule, const TaspConfig& cfg,
                      Rng& rng, const Deadline& deadline = {});

// r_i from precomputed alpha lists and instance probabilities.
std::vector<double> aggregate_alpha(std::span<const AlphaList> alphas, std::span<const double> log_probabilities);

struct HealConfig {
    TaspConfig tasp;
    double imbalance_tolerance = 0.05;
    std::uint64_t partition_seed = 0;
};

struct PartDiagnostics {
    int part_index = 0;
    int size = 0;
    int budget = 0;
    std::vector<NodeId> picked;
    std::vector<std::pair<NodeId, double>> expected;  // r_i of the first pick, global ids
};

struct HealResult {
    Action action;
    double cut_weight = 0.0;
    std::vector<PartDiagnostics> parts;
};

// K-partition variant: one TASP pick (budget 1) per part of a K-way partition
// of the observation-updated network; exhausted parts pass their budget to
// the part with the most eligible nodes.
HealResult heal_plan(const UncertainNetwork& net, const Belief& b, int k, int rounds, int steps, int round,
                     const HealConfig& cfg, Rng& rng, const Deadline& deadline = {});

// T-partition variant: all K picks of round i come from part i of a T-way
// partition of the original network, built greedily by repeated single-node
// TASP calls. Parts with fewer than K eligible nodes borrow the highest-DC
// eligible nodes of the parts most connected to them.
HealResult heal_t_plan(const UncertainNetwork& net, const Belief& b, int k, int rounds, int steps, int round,
                       const HealConfig& cfg, Rng& rng, const Deadline& deadline = {});

}  // namespace dime
