#include "dime/harness/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "dime/core/error.hpp"
#include "dime/netcore/network_io.hpp"

namespace dime {
namespace {

constexpr int kMaxExactNodes = 16;

void check_tiny(const UncertainNetwork& net) {
    if (net.size() > kMaxExactNodes) throw ValidationError("exact enumeration limited to 16 nodes");
    if (net.uncertain_count() > 20) throw ValidationError("exact enumeration limited to 20 uncertain edges");
}

std::vector<std::uint8_t> f_of(std::uint64_t x, std::size_t n) {
    std::vector<std::uint8_t> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = static_cast<std::uint8_t>((x >> i) & 1U);
    return f;
}

// Iterates over F vectors consistent with `known`, passing each with its
// probability.
template <class Fn>
void for_each_consistent(const UncertainNetwork& net, const EdgeKnowledge& known, Fn&& fn) {
    auto unc = net.uncertain_edges();
    const std::size_t n = unc.size();
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
        auto f = f_of(x, n);
        double prob = 1.0;
        for (std::size_t e = 0; e < n && prob > 0.0; ++e) {
            if (known[e] >= 0) {
                if (f[e] != known[e]) prob = 0.0;
            } else {
                prob *= f[e] ? *unc[e].u : 1.0 - *unc[e].u;
            }
        }
        if (prob > 0.0) fn(f, prob);
    }
}

NodeSet set_of(std::span<const NodeId> nodes) {
    NodeSet s = 0;
    for (NodeId v : nodes) s |= NodeSet{1} << v;
    return s;
}

// Knowledge revealed by observing the out-edges of `nodes` in instance f.
EdgeKnowledge reveal(const UncertainNetwork& net, std::span<const NodeId> nodes, std::span<const std::uint8_t> f) {
    EdgeKnowledge k(net.uncertain_count(), -1);
    for (NodeId v : nodes) {
        for (std::size_t e : net.uncertain_out(v)) k[e] = static_cast<std::int8_t>(f[e]);
    }
    return k;
}

}  // namespace

std::vector<double> exact_w_distribution(const UncertainNetwork& net, std::span<const std::uint8_t> kept,
                                         std::vector<double> start, int steps) {
    check_tiny(net);
    const int n = net.size();
    const std::size_t states = std::size_t{1} << n;
    if (start.size() != states) throw ValidationError("start distribution must have 2^N entries");
    const std::size_t nc = net.certain_edges().size();
    std::vector<double> cur = std::move(start), next(states);
    std::vector<double> q(static_cast<std::size_t>(n));
    for (int t = 0; t < steps; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t w = 0; w < states; ++w) {
            if (cur[w] == 0.0) continue;
            // Per-node activation probability for this round.
            std::fill(q.begin(), q.end(), 1.0);  // probability of staying inactive
            for (std::size_t g = 0; g < net.edge_count(); ++g) {
                if (g >= nc && !kept[g - nc]) continue;
                const Edge& e = net.edge(g);
                if ((w >> e.src & 1U) && !(w >> e.dst & 1U)) q[static_cast<std::size_t>(e.dst)] *= 1.0 - e.p;
            }
            std::vector<int> open;
            for (int v = 0; v < n; ++v) {
                if (!(w >> v & 1U) && q[static_cast<std::size_t>(v)] < 1.0) open.push_back(v);
            }
            for (std::uint32_t sub = 0; sub < (1U << open.size()); ++sub) {
                double prob = cur[w];
                std::size_t nw = w;
                for (std::size_t i = 0; i < open.size(); ++i) {
                    const double stay = q[static_cast<std::size_t>(open[i])];
                    if (sub >> i & 1U) {
                        prob *= 1.0 - stay;
                        nw |= std::size_t{1} << open[i];
                    } else {
                        prob *= stay;
                    }
                }
                if (prob > 0.0) next[nw] += prob;
            }
        }
        std::swap(cur, next);
    }
    return cur;
}

double exact_instance_spread(const UncertainNetwork& net, std::span<const std::uint8_t> kept, NodeSet seeds,
                             int steps) {
    std::vector<double> start(std::size_t{1} << net.size(), 0.0);
    start[seeds] = 1.0;
    const auto dist = exact_w_distribution(net, kept, std::move(start), steps);
    double mean = 0.0;
    for (std::size_t w = 0; w < dist.size(); ++w) mean += dist[w] * std::popcount(w);
    return mean;
}

double exact_plan_spread(const UncertainNetwork& net, std::span<const Action> plan, int steps) {
    check_tiny(net);
    double total = 0.0;
    for_each_consistent(net, EdgeKnowledge(net.uncertain_count(), -1), [&](const auto& f, double prob) {
        std::vector<double> dist(std::size_t{1} << net.size(), 0.0);
        dist[0] = 1.0;
        for (const Action& a : plan) {
            const NodeSet s = set_of(a.nodes());
            std::vector<double> seeded(dist.size(), 0.0);
            for (std::size_t w = 0; w < dist.size(); ++w) seeded[w | s] += dist[w];
            dist = exact_w_distribution(net, f, std::move(seeded), steps);
        }
        double mean = 0.0;
        for (std::size_t w = 0; w < dist.size(); ++w) mean += dist[w] * std::popcount(w);
        total += prob * mean;
    });
    return total;
}

double exact_marginal_gain(const UncertainNetwork& net, std::span<const NodeId> nodes, const EdgeKnowledge& known,
                           NodeId x, int steps) {
    check_tiny(net);
    const NodeSet s = set_of(nodes);
    double gain = 0.0, mass = 0.0;
    for_each_consistent(net, known, [&](const auto& f, double prob) {
        gain += prob * (exact_instance_spread(net, f, s | NodeSet{1} << x, steps) -
                        exact_instance_spread(net, f, s, steps));
        mass += prob;
    });
    if (mass <= 0.0) throw ValidationError("history has probability zero");
    return gain / mass;
}

std::optional<AdaSubWitness> find_adasub_counterexample(long budget, Rng& rng) {
    if (budget < 1) throw ValidationError("search budget must be >= 1");
    static constexpr double kP[] = {0.3, 0.6, 1.0};
    static constexpr double kU[] = {0.3, 0.5, 0.7};
    for (long tried = 1; tried <= budget; ++tried) {
        const int n = std::uniform_int_distribution<int>(3, 6)(rng);
        const int m = std::uniform_int_distribution<int>(2, 8)(rng);
        const int steps = std::uniform_int_distribution<int>(1, 2)(rng);
        std::vector<std::pair<NodeId, NodeId>> pairs;
        for (NodeId a = 0; a < n; ++a) {
            for (NodeId b = 0; b < n; ++b) {
                if (a != b) pairs.emplace_back(a, b);
            }
        }
        std::shuffle(pairs.begin(), pairs.end(), rng);
        pairs.resize(std::min<std::size_t>(pairs.size(), static_cast<std::size_t>(m)));
        const int n_unc = std::uniform_int_distribution<int>(0, std::min<int>(3, static_cast<int>(pairs.size())))(rng);
        if (n_unc == 0) continue;
        std::vector<Edge> certain, uncertain;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            Edge e{static_cast<EdgeId>(i), pairs[i].first, pairs[i].second, kP[rng() % 3], std::nullopt};
            if (static_cast<int>(i) < n_unc) {
                e.u = kU[rng() % 3];
                uncertain.push_back(e);
            } else {
                certain.push_back(e);
            }
        }
        const UncertainNetwork net(n, certain, uncertain, {fmt::format("search-{}", tried), "adasub search", {}});
        const std::size_t nu = net.uncertain_count();

        // h: at most one observed node; h' adds one more.
        std::vector<std::vector<NodeId>> smalls{{}};
        for (NodeId v = 0; v < n; ++v) smalls.push_back({v});
        for (const auto& small : smalls) {
            for (std::uint64_t fx = 0; fx < (std::uint64_t{1} << nu); ++fx) {
                const auto f = f_of(fx, nu);
                const EdgeKnowledge ks = reveal(net, small, f);
                // Each revealed pattern once: unrevealed bits stay zero.
                bool canonical = true;
                for (std::size_t e = 0; e < nu; ++e) {
                    if (ks[e] < 0 && f[e]) canonical = false;
                }
                if (!canonical) continue;
                for (NodeId y = 0; y < n; ++y) {
                    if (std::find(small.begin(), small.end(), y) != small.end()) continue;
                    std::vector<NodeId> large = small;
                    large.push_back(y);
                    const auto y_out = net.uncertain_out(y);
                    for (std::uint32_t yb = 0; yb < (1U << y_out.size()); ++yb) {
                        EdgeKnowledge kl = ks;
                        for (std::size_t i = 0; i < y_out.size(); ++i) {
                            kl[y_out[i]] = static_cast<std::int8_t>(yb >> i & 1U);
                        }
                        for (NodeId x = 0; x < n; ++x) {
                            if (std::find(large.begin(), large.end(), x) != large.end()) continue;
                            const double g_small = exact_marginal_gain(net, small, ks, x, steps);
                            const double g_large = exact_marginal_gain(net, large, kl, x, steps);
                            if (g_large > g_small + 1e-9) {
                                return AdaSubWitness{net, steps, small, ks, large, kl, x, g_small, g_large, tried};
                            }
                        }
                    }
                }
            }
        }
    }
    return std::nullopt;
}

WitnessCheck verify_witness(const AdaSubWitness& w) {
    const UncertainNetwork& net = w.net;
    WitnessCheck check;
    // Nesting: h' extends h on every revealed bit.
    for (NodeId v : w.small_nodes) {
        if (std::find(w.large_nodes.begin(), w.large_nodes.end(), v) == w.large_nodes.end()) return check;
    }
    for (std::size_t e = 0; e < w.small_known.size(); ++e) {
        if (w.small_known[e] >= 0 && w.large_known[e] != w.small_known[e]) return check;
    }
    const std::size_t nu = net.uncertain_count();
    const std::size_t nc = net.certain_edges().size();

    // Spread of seed set s on instance f, enumerating one coin per
    // (present edge, round).
    auto spread = [&](NodeSet s, const std::vector<std::uint8_t>& f) {
        std::vector<std::size_t> present;
        for (std::size_t g = 0; g < net.edge_count(); ++g) {
            if (g < nc || f[g - nc]) present.push_back(g);
        }
        const std::size_t n_coins = present.size() * static_cast<std::size_t>(w.steps);
        double mean = 0.0;
        for (std::uint64_t coins = 0; coins < (std::uint64_t{1} << n_coins); ++coins) {
            double prob = 1.0;
            NodeSet cur = s;
            for (int t = 0; t < w.steps; ++t) {
                NodeSet next = cur;
                for (std::size_t i = 0; i < present.size(); ++i) {
                    const Edge& e = net.edge(present[i]);
                    const bool fire = coins >> (static_cast<std::size_t>(t) * present.size() + i) & 1U;
                    prob *= fire ? e.p : 1.0 - e.p;
                    if (fire && (cur >> e.src & 1U)) next |= NodeSet{1} << e.dst;
                }
                cur = next;
            }
            mean += prob * std::popcount(cur);
        }
        return mean;
    };
    auto gain = [&](const std::vector<NodeId>& nodes, const EdgeKnowledge& known) {
        double total = 0.0, mass = 0.0;
        const NodeSet s = set_of(nodes);
        for (std::uint64_t fx = 0; fx < (std::uint64_t{1} << nu); ++fx) {
            const auto f = f_of(fx, nu);
            double prob = 1.0;
            for (std::size_t e = 0; e < nu; ++e) {
                const double u = *net.uncertain_edges()[e].u;
                if (known[e] >= 0) {
                    prob *= f[e] == known[e] ? 1.0 : 0.0;
                } else {
                    prob *= f[e] ? u : 1.0 - u;
                }
            }
            if (prob == 0.0) continue;
            total += prob * (spread(s | NodeSet{1} << w.x, f) - spread(s, f));
            mass += prob;
        }
        return mass > 0.0 ? total / mass : std::nan("");
    };
    for (NodeId v : w.large_nodes) {
        if (v == w.x) return check;
    }
    // Revealed bits must be exactly the out-edges of each history's nodes.
    auto domain_ok = [&](const std::vector<NodeId>& nodes, const EdgeKnowledge& known) {
        for (std::size_t e = 0; e < nu; ++e) {
            const NodeId src = net.uncertain_edges()[e].src;
            const bool in = std::find(nodes.begin(), nodes.end(), src) != nodes.end();
            if (in != (known[e] >= 0)) return false;
        }
        return true;
    };
    if (!domain_ok(w.small_nodes, w.small_known) || !domain_ok(w.large_nodes, w.large_known)) return check;
    check.gain_small = gain(w.small_nodes, w.small_known);
    check.gain_large = gain(w.large_nodes, w.large_known);
    check.ok = std::abs(check.gain_small - w.gain_small) < 1e-9 && std::abs(check.gain_large - w.gain_large) < 1e-9 &&
               check.gain_large > check.gain_small + 1e-9;
    return check;
}

nlohmann::json to_json(const AdaSubWitness& w) {
    return {{"network", nlohmann::json::parse(serialize_network(w.net))},
            {"L", w.steps},
            {"h_nodes", w.small_nodes},
            {"h_known", w.small_known},
            {"h_prime_nodes", w.large_nodes},
            {"h_prime_known", w.large_known},
            {"x", w.x},
            {"gain_h", w.gain_small},
            {"gain_h_prime", w.gain_large},
            {"networks_tried", w.networks_tried}};
}

}  // namespace dime
