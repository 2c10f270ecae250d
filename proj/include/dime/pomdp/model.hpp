#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dime/core/random.hpp"
#include "dime/diffusion/cascade.hpp"
#include "dime/netcore/network.hpp"

namespace dime {

// State <W, F>: influence bits and uncertain-edge existence bits.
struct PomdpState {
    NodeMask w;
    std::vector<std::uint8_t> f;

    bool operator==(const PomdpState&) const = default;
};

// A set of distinct nodes in canonical (ascending) order. Ordering is
// lexicographic on that form, which is the tie-break rule everywhere.
class Action {
public:
    Action() = default;
    // Sorts; throws ValidationError on duplicate nodes.
    explicit Action(std::vector<NodeId> nodes);

    std::span<const NodeId> nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    bool contains(NodeId v) const;
    std::string str() const;  // "{1,4,9}"

    auto operator<=>(const Action&) const = default;
    bool operator==(const Action&) const = default;

private:
    std::vector<NodeId> nodes_;
};

struct ObservedEdge {
    EdgeId edge = 0;
    std::uint8_t bit = 0;
    bool operator==(const ObservedEdge&) const = default;
};

// F bits of the uncertain edges leaving the action's nodes, ordered by edge id.
struct Observation {
    std::vector<ObservedEdge> entries;
    bool operator==(const Observation&) const = default;
};

struct GenerativeOutcome {
    PomdpState next;
    Observation obs;
    int reward = 0;  // newly influenced nodes
};

// Particle belief. Particles carry uniform weight.
struct Belief {
    EdgeKnowledge known;                  // per uncertain-edge index: -1 / 0 / 1
    std::vector<PomdpState> particles;
    std::vector<std::pair<Action, Observation>> history;
    NodeMask chosen;                      // nodes marked influenced by interventions

    // Observed edges keyed by edge id.
    std::map<EdgeId, int> known_edges(const UncertainNetwork& net) const;
    // Nodes not yet marked as chosen, ascending.
    std::vector<NodeId> eligible() const;
    // Mean of ||w|| over particles.
    double expected_influenced() const;
};

inline constexpr int kDefaultParticles = 1 << 10;

// Checks range and (when k > 0) size; throws ValidationError.
void validate_action(const UncertainNetwork& net, const Action& a, int k = 0);

// Theta(a): ids of uncertain edges whose source is in a, ascending.
std::vector<EdgeId> observed_edge_set(const Action& a, const UncertainNetwork& net);
// Same edges as uncertain-edge indices, in Theta order.
std::vector<std::size_t> observed_edge_indices(const Action& a, const UncertainNetwork& net);

Observation observe(const UncertainNetwork& net, const Action& a, std::span<const std::uint8_t> f);

Belief initial_belief(const UncertainNetwork& net, int n_particles, Rng& rng);

// Lambda(s, a): chosen nodes become influenced, then `steps` cascade rounds on
// the instance given by s.f; the observation reveals F on Theta(a).
GenerativeOutcome generative_step(const UncertainNetwork& net, const PomdpState& s, const Action& a, int steps,
                                  Rng& rng);

// Clamps observed bits in every particle (unobserved bits are kept, so the
// W history of each particle stays consistent with them), marks the
// influenced nodes (all of `a`, or `attended` when given) and advances each
// particle by `steps` cascade rounds on its own instance.
// Throws ValidationError if the observation's edge ids differ from Theta(a)
// or attended is not a subset of a.
Belief belief_update(const UncertainNetwork& net, const Belief& b, const Action& a, const Observation& o, int steps,
                     Rng& rng, const std::optional<std::vector<NodeId>>& attended = std::nullopt);

// One rollout on a fixed instance from influence state w: take `a`, then up to
// horizon - 1 further rounds choosing `k` uniformly random un-influenced
// nodes, each followed by `steps` cascade rounds; stops early once every node
// is influenced. Returns the total number of newly influenced nodes.
int random_rollout(const CascadeModel& model, NodeMask w, const Action& a, int horizon, int k, int steps, Rng& rng);

// One rollout sample from a particle drawn uniformly from b.
double rollout_value(const UncertainNetwork& net, const Belief& b, const Action& a, int horizon, int k, int steps,
                     Rng& rng);

}  // namespace dime
