#include "dime/pomdp/model.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "dime/core/error.hpp"

namespace dime {

Action::Action(std::vector<NodeId> nodes) : nodes_(std::move(nodes)) {
    std::sort(nodes_.begin(), nodes_.end());
    if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
        throw ValidationError("action contains a repeated node");
    }
}

bool Action::contains(NodeId v) const { return std::binary_search(nodes_.begin(), nodes_.end(), v); }

std::string Action::str() const { return fmt::format("{{{}}}", fmt::join(nodes_, ",")); }

std::map<EdgeId, int> Belief::known_edges(const UncertainNetwork& net) const {
    std::map<EdgeId, int> out;
    auto unc = net.uncertain_edges();
    for (std::size_t i = 0; i < known.size(); ++i) {
        if (known[i] >= 0) out[unc[i].id] = known[i];
    }
    return out;
}

std::vector<NodeId> Belief::eligible() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < chosen.size(); ++v) {
        if (!chosen.test(v)) out.push_back(v);
    }
    return out;
}

double Belief::expected_influenced() const {
    if (particles.empty()) return 0.0;
    double total = 0.0;
    for (const auto& p : particles) total += p.w.count();
    return total / static_cast<double>(particles.size());
}

void validate_action(const UncertainNetwork& net, const Action& a, int k) {
    if (k > 0 && static_cast<int>(a.size()) != k) {
        throw ValidationError(fmt::format("action {} has {} nodes, expected {}", a.str(), a.size(), k));
    }
    for (NodeId v : a.nodes()) {
        if (v < 0 || v >= net.size()) throw ValidationError(fmt::format("action node {} out of range", v));
    }
}

std::vector<std::size_t> observed_edge_indices(const Action& a, const UncertainNetwork& net) {
    std::vector<std::size_t> idx;
    for (NodeId v : a.nodes()) {
        auto out = net.uncertain_out(v);
        idx.insert(idx.end(), out.begin(), out.end());
    }
    auto unc = net.uncertain_edges();
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return unc[x].id < unc[y].id; });
    return idx;
}

std::vector<EdgeId> observed_edge_set(const Action& a, const UncertainNetwork& net) {
    std::vector<EdgeId> ids;
    auto unc = net.uncertain_edges();
    for (std::size_t i : observed_edge_indices(a, net)) ids.push_back(unc[i].id);
    return ids;
}

Observation observe(const UncertainNetwork& net, const Action& a, std::span<const std::uint8_t> f) {
    Observation o;
    auto unc = net.uncertain_edges();
    for (std::size_t i : observed_edge_indices(a, net)) o.entries.push_back({unc[i].id, f[i]});
    return o;
}

Belief initial_belief(const UncertainNetwork& net, int n_particles, Rng& rng) {
    if (n_particles < 1) throw ValidationError("initial_belief: need at least one particle");
    Belief b;
    b.known.assign(net.uncertain_count(), -1);
    b.chosen = NodeMask(net.size());
    b.particles.reserve(static_cast<std::size_t>(n_particles));
    auto unc = net.uncertain_edges();
    for (int i = 0; i < n_particles; ++i) {
        PomdpState s{NodeMask(net.size()), std::vector<std::uint8_t>(unc.size())};
        for (std::size_t e = 0; e < unc.size(); ++e) s.f[e] = bernoulli(rng, *unc[e].u) ? 1 : 0;
        b.particles.push_back(std::move(s));
    }
    return b;
}

GenerativeOutcome generative_step(const UncertainNetwork& net, const PomdpState& s, const Action& a, int steps,
                                  Rng& rng) {
    validate_action(net, a);
    if (s.w.size() != net.size() || s.f.size() != net.uncertain_count()) {
        throw ValidationError("state dimensions do not match the network");
    }
    GenerativeOutcome out;
    out.next = s;
    for (NodeId v : a.nodes()) out.next.w.set(v);
    CascadeModel(net, s.f).run(out.next.w, steps, rng());
    out.obs = observe(net, a, s.f);
    out.reward = out.next.w.count() - s.w.count();
    return out;
}

Belief belief_update(const UncertainNetwork& net, const Belief& b, const Action& a, const Observation& o, int steps,
                     Rng& rng, const std::optional<std::vector<NodeId>>& attended) {
    validate_action(net, a);
    const auto theta = observed_edge_indices(a, net);
    auto unc = net.uncertain_edges();
    if (o.entries.size() != theta.size()) {
        throw ValidationError(fmt::format("observation has {} edges, action reveals {}", o.entries.size(), theta.size()));
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (o.entries[i].edge != unc[theta[i]].id) {
            throw ValidationError(fmt::format("observation edge {} is not in Theta(a) at position {}", o.entries[i].edge, i));
        }
        if (o.entries[i].bit > 1) throw ValidationError("observation bits must be 0 or 1");
    }
    std::vector<NodeId> influenced(a.nodes().begin(), a.nodes().end());
    if (attended) {
        for (NodeId v : *attended) {
            if (!a.contains(v)) throw ValidationError(fmt::format("attended node {} is not part of the action", v));
        }
        influenced = *attended;
    }

    Belief next;
    next.known = b.known;
    for (std::size_t i = 0; i < theta.size(); ++i) next.known[theta[i]] = static_cast<std::int8_t>(o.entries[i].bit);
    next.chosen = b.chosen;
    for (NodeId v : influenced) next.chosen.set(v);
    next.history = b.history;
    next.history.emplace_back(a, o);

    next.particles.reserve(b.particles.size());
    for (const PomdpState& p : b.particles) {
        PomdpState s = p;
        for (std::size_t i = 0; i < theta.size(); ++i) s.f[theta[i]] = o.entries[i].bit;
        for (NodeId v : influenced) s.w.set(v);
        CascadeModel(net, s.f).run(s.w, steps, rng());
        next.particles.push_back(std::move(s));
    }
    return next;
}

int random_rollout(const CascadeModel& model, NodeMask w, const Action& a, int horizon, int k, int steps, Rng& rng) {
    const int before = w.count();
    const int n = w.size();
    for (NodeId v : a.nodes()) w.set(v);
    model.run(w, steps, rng());
    std::vector<NodeId> pool;
    for (int h = 1; h < horizon; ++h) {
        pool.clear();
        for (NodeId v = 0; v < n; ++v) {
            if (!w.test(v)) pool.push_back(v);
        }
        if (pool.empty()) break;
        const auto pick = std::min<std::size_t>(static_cast<std::size_t>(k), pool.size());
        for (std::size_t i = 0; i < pick; ++i) {
            std::uniform_int_distribution<std::size_t> d(i, pool.size() - 1);
            std::swap(pool[i], pool[d(rng)]);
            w.set(pool[i]);
        }
        model.run(w, steps, rng());
    }
    return w.count() - before;
}

double rollout_value(const UncertainNetwork& net, const Belief& b, const Action& a, int horizon, int k, int steps,
                     Rng& rng) {
    if (horizon < 1) throw ValidationError("rollout horizon must be >= 1");
    if (b.particles.empty()) throw ValidationError("belief has no particles");
    validate_action(net, a);
    std::uniform_int_distribution<std::size_t> pick(0, b.particles.size() - 1);
    const PomdpState& s = b.particles[pick(rng)];
    return random_rollout(CascadeModel(net, s.f), s.w, a, horizon, k, steps, rng);
}

}  // namespace dime
