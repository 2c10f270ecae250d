#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "dime/pomdp/model.hpp"

namespace dime {

// Exact computations for tiny networks (N <= 16), W as a bitmask.
using NodeSet = std::uint32_t;

// Distribution over W after `steps` synchronous rounds on a fixed instance,
// starting from the distribution `start` (indexed by W, size 2^N).
std::vector<double> exact_w_distribution(const UncertainNetwork& net, std::span<const std::uint8_t> kept,
                                         std::vector<double> start, int steps);

// E[|W|] after seeding `seeds` and `steps` rounds on a fixed instance.
double exact_instance_spread(const UncertainNetwork& net, std::span<const std::uint8_t> kept, NodeSet seeds,
                             int steps);

// Expected final spread of an open-loop plan (one action per round, each
// followed by `steps` cascade rounds), averaged over every F vector.
double exact_plan_spread(const UncertainNetwork& net, std::span<const Action> plan, int steps);

// Nested observation histories h < h' for a violation of adaptive
// submodularity. An item is a node; its state is the existence bits of its
// uncertain out-edges. f(S, F) is the expected spread after seeding S and
// running `steps` cascade rounds on instance F.
struct AdaSubWitness {
    UncertainNetwork net;
    int steps = 1;
    std::vector<NodeId> small_nodes;   // dom(h)
    EdgeKnowledge small_known;         // bits revealed by h
    std::vector<NodeId> large_nodes;   // dom(h')
    EdgeKnowledge large_known;
    NodeId x = 0;
    double gain_small = 0.0;           // Delta(x | h)
    double gain_large = 0.0;           // Delta(x | h'), larger
    long networks_tried = 0;
};

// E over F consistent with `known` of f(nodes + x, F) - f(nodes, F).
double exact_marginal_gain(const UncertainNetwork& net, std::span<const NodeId> nodes, const EdgeKnowledge& known,
                           NodeId x, int steps);

// Randomised search over tiny networks (N <= 6, at most 3 uncertain edges,
// L <= 2). Networks without uncertain edges are skipped. Returns nullopt
// when `budget` networks have been tried without a witness.
inline constexpr long kDefaultSearchBudget = 10000;

std::optional<AdaSubWitness> find_adasub_counterexample(long budget, Rng& rng);

struct WitnessCheck {
    bool ok = false;
    double gain_small = 0.0;
    double gain_large = 0.0;
};

// Recomputes both marginal gains by enumerating every F vector and every
// per-(edge, round) activation coin, independently of the W-distribution
// code, and checks the histories are nested and consistent.
WitnessCheck verify_witness(const AdaSubWitness& w);

nlohmann::json to_json(const AdaSubWitness& w);

}  // namespace dime
