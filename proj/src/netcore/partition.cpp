#include "dime/netcore/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "dime/core/error.hpp"

namespace dime {
namespace {

// Undirected weighted graph with vertex weights, adjacency lists.
struct Graph {
    std::vector<int> vweight;
    std::vector<std::vector<std::pair<int, double>>> adj;

    int size() const { return static_cast<int>(vweight.size()); }
};

Graph from_network(const UncertainNetwork& net) {
    const int n = net.size();
    std::vector<std::map<int, double>> acc(static_cast<std::size_t>(n));
    auto add = [&](const Edge& e) {
        const double w = edge_weight(e);
        acc[static_cast<std::size_t>(e.src)][e.dst] += w;
        acc[static_cast<std::size_t>(e.dst)][e.src] += w;
    };
    for (const Edge& e : net.certain_edges()) add(e);
    for (const Edge& e : net.uncertain_edges()) add(e);
    Graph g;
    g.vweight.assign(static_cast<std::size_t>(n), 1);
    g.adj.resize(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        for (auto [u, w] : acc[static_cast<std::size_t>(v)]) g.adj[static_cast<std::size_t>(v)].emplace_back(u, w);
    }
    return g;
}

struct Level {
    Graph graph;
    std::vector<int> coarse_of;  // fine vertex -> vertex of the next coarser graph
};

// Heavy-edge matching. Returns the coarse graph and the fine->coarse map.
std::pair<Graph, std::vector<int>> coarsen(const Graph& g, int max_vweight, Rng& rng) {
    const int n = g.size();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> match(static_cast<std::size_t>(n), -1);
    for (int v : order) {
        if (match[static_cast<std::size_t>(v)] >= 0) continue;
        int best = -1;
        double best_w = -1.0;
        for (auto [u, w] : g.adj[static_cast<std::size_t>(v)]) {
            if (match[static_cast<std::size_t>(u)] >= 0 || u == v) continue;
            if (g.vweight[static_cast<std::size_t>(v)] + g.vweight[static_cast<std::size_t>(u)] > max_vweight) continue;
            if (w > best_w || (w == best_w && u < best)) {
                best_w = w;
                best = u;
            }
        }
        match[static_cast<std::size_t>(v)] = best >= 0 ? best : v;
        if (best >= 0) match[static_cast<std::size_t>(best)] = v;
    }
    std::vector<int> coarse_of(static_cast<std::size_t>(n), -1);
    int nc = 0;
    for (int v = 0; v < n; ++v) {
        if (coarse_of[static_cast<std::size_t>(v)] >= 0) continue;
        coarse_of[static_cast<std::size_t>(v)] = nc;
        coarse_of[static_cast<std::size_t>(match[static_cast<std::size_t>(v)])] = nc;
        ++nc;
    }
    Graph c;
    c.vweight.assign(static_cast<std::size_t>(nc), 0);
    std::vector<std::map<int, double>> acc(static_cast<std::size_t>(nc));
    for (int v = 0; v < n; ++v) {
        const int cv = coarse_of[static_cast<std::size_t>(v)];
        c.vweight[static_cast<std::size_t>(cv)] += g.vweight[static_cast<std::size_t>(v)];
        for (auto [u, w] : g.adj[static_cast<std::size_t>(v)]) {
            const int cu = coarse_of[static_cast<std::size_t>(u)];
            if (cu != cv) acc[static_cast<std::size_t>(cv)][cu] += w;
        }
    }
    c.adj.resize(static_cast<std::size_t>(nc));
    for (int v = 0; v < nc; ++v) {
        for (auto [u, w] : acc[static_cast<std::size_t>(v)]) c.adj[static_cast<std::size_t>(v)].emplace_back(u, w);
    }
    return {std::move(c), std::move(coarse_of)};
}

double graph_cut(const Graph& g, const std::vector<int>& part) {
    double cut = 0.0;
    for (int v = 0; v < g.size(); ++v) {
        for (auto [u, w] : g.adj[static_cast<std::size_t>(v)]) {
            if (u > v && part[static_cast<std::size_t>(u)] != part[static_cast<std::size_t>(v)]) cut += w;
        }
    }
    return cut;
}

std::vector<int> part_weights(const Graph& g, const std::vector<int>& part, int k) {
    std::vector<int> pw(static_cast<std::size_t>(k), 0);
    for (int v = 0; v < g.size(); ++v) pw[static_cast<std::size_t>(part[static_cast<std::size_t>(v)])] += g.vweight[static_cast<std::size_t>(v)];
    return pw;
}

// Greedy graph growing: parts 0..k-2 grow from a random seed vertex by
// repeatedly absorbing the unassigned vertex most strongly connected to the
// region; the last part takes the remainder.
std::vector<int> grow(const Graph& g, int k, int total, int cap, Rng& rng) {
    const int n = g.size();
    std::vector<int> part(static_cast<std::size_t>(n), k - 1);
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    int remaining = total;
    for (int p = 0; p < k - 1; ++p) {
        const int target = remaining / (k - p);
        int weight = 0;
        std::vector<double> conn(static_cast<std::size_t>(n), 0.0);
        std::vector<char> touched(static_cast<std::size_t>(n), 0);
        auto absorb = [&](int v) {
            taken[static_cast<std::size_t>(v)] = 1;
            part[static_cast<std::size_t>(v)] = p;
            weight += g.vweight[static_cast<std::size_t>(v)];
            for (auto [u, w] : g.adj[static_cast<std::size_t>(v)]) {
                conn[static_cast<std::size_t>(u)] += w;
                touched[static_cast<std::size_t>(u)] = 1;
            }
        };
        while (weight < target) {
            int best = -1;
            double best_c = -1.0;
            for (int v = 0; v < n; ++v) {
                if (taken[static_cast<std::size_t>(v)] || !touched[static_cast<std::size_t>(v)]) continue;
                if (weight + g.vweight[static_cast<std::size_t>(v)] > cap) continue;
                if (conn[static_cast<std::size_t>(v)] > best_c) {
                    best_c = conn[static_cast<std::size_t>(v)];
                    best = v;
                }
            }
            if (best < 0) {
                // Region is closed (or full neighbours): restart from a random free vertex.
                std::vector<int> free;
                for (int v = 0; v < n; ++v) {
                    if (!taken[static_cast<std::size_t>(v)] && weight + g.vweight[static_cast<std::size_t>(v)] <= cap) free.push_back(v);
                }
                if (free.empty()) break;
                best = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
            }
            absorb(best);
        }
        remaining -= weight;
    }
    return part;
}

// One KL/FM pass: tentatively move the best-gain movable vertex (each at most
// once), track the best prefix, roll back the rest. Returns the cut gain.
double fm_pass(const Graph& g, std::vector<int>& part, int k, int cap, Rng& rng) {
    const int n = g.size();
    std::vector<int> pw = part_weights(g, part, k);
    std::vector<char> locked(static_cast<std::size_t>(n), 0);
    std::vector<std::pair<int, int>> moves;  // (vertex, from)
    double running = 0.0, best_total = 0.0;
    std::size_t best_len = 0;
    int since_best = 0;
    const int patience = std::max(25, n / 4);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> to_part(static_cast<std::size_t>(k));

    while (since_best < patience) {
        int best_v = -1, best_to = -1;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (int v : order) {
            if (locked[static_cast<std::size_t>(v)]) continue;
            const int from = part[static_cast<std::size_t>(v)];
            const int vw = g.vweight[static_cast<std::size_t>(v)];
            if (pw[static_cast<std::size_t>(from)] - vw < 1) continue;
            std::fill(to_part.begin(), to_part.end(), 0.0);
            bool boundary = false;
            for (auto [u, w] : g.adj[static_cast<std::size_t>(v)]) {
                to_part[static_cast<std::size_t>(part[static_cast<std::size_t>(u)])] += w;
                if (part[static_cast<std::size_t>(u)] != from) boundary = true;
            }
            if (!boundary) continue;
            for (int t = 0; t < k; ++t) {
                if (t == from || pw[static_cast<std::size_t>(t)] + vw > cap) continue;
                const double gain = to_part[static_cast<std::size_t>(t)] - to_part[static_cast<std::size_t>(from)];
                if (gain > best_gain) {
                    best_gain = gain;
                    best_v = v;
                    best_to = t;
                }
            }
        }
        if (best_v < 0) break;
        const int from = part[static_cast<std::size_t>(best_v)];
        part[static_cast<std::size_t>(best_v)] = best_to;
        pw[static_cast<std::size_t>(from)] -= g.vweight[static_cast<std::size_t>(best_v)];
        pw[static_cast<std::size_t>(best_to)] += g.vweight[static_cast<std::size_t>(best_v)];
        locked[static_cast<std::size_t>(best_v)] = 1;
        moves.emplace_back(best_v, from);
        running += best_gain;
        if (running > best_total + 1e-12) {
            best_total = running;
            best_len = moves.size();
            since_best = 0;
        } else {
            ++since_best;
        }
    }
    for (std::size_t i = moves.size(); i > best_len; --i) part[static_cast<std::size_t>(moves[i - 1].first)] = moves[i - 1].second;
    return best_total;
}

void refine(const Graph& g, std::vector<int>& part, int k, int cap, Rng& rng) {
    for (int pass = 0; pass < 8; ++pass) {
        if (fm_pass(g, part, k, cap, rng) <= 1e-12) break;
    }
}

// Enforces non-empty parts and the size cap on the finest graph (unit weights).
void repair(const Graph& g, std::vector<int>& part, int k, int cap) {
    auto gain_to = [&](int v, int t) {
        double in = 0.0, out = 0.0;
        for (auto [u, w] : g.adj[static_cast<std::size_t>(v)]) {
            if (part[static_cast<std::size_t>(u)] == part[static_cast<std::size_t>(v)]) in += w;
            if (part[static_cast<std::size_t>(u)] == t) out += w;
        }
        return out - in;
    };
    auto move_best = [&](int from, int to) {
        int best = -1;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (int v = 0; v < g.size(); ++v) {
            if (part[static_cast<std::size_t>(v)] != from) continue;
            const double gain = gain_to(v, to);
            if (gain > best_gain) {
                best_gain = gain;
                best = v;
            }
        }
        part[static_cast<std::size_t>(best)] = to;
    };
    for (;;) {
        auto pw = part_weights(g, part, k);
        auto empty = std::find(pw.begin(), pw.end(), 0);
        auto largest = std::max_element(pw.begin(), pw.end());
        if (empty != pw.end()) {
            move_best(static_cast<int>(largest - pw.begin()), static_cast<int>(empty - pw.begin()));
            continue;
        }
        if (*largest <= cap) break;
        auto smallest = std::min_element(pw.begin(), pw.end());
        move_best(static_cast<int>(largest - pw.begin()), static_cast<int>(smallest - pw.begin()));
    }
}

std::vector<int> multilevel(const Graph& fine, int k, int cap, Rng& rng) {
    const int total = fine.size();
    std::vector<Level> levels;
    Graph current = fine;
    const int stop = std::max(20, 6 * k);
    const int max_vweight = std::max(1, cap / 2);
    while (current.size() > stop) {
        auto [coarse, map] = coarsen(current, max_vweight, rng);
        if (coarse.size() > current.size() * 9 / 10) break;
        levels.push_back({std::move(current), std::move(map)});
        current = std::move(coarse);
    }

    std::vector<int> best_part;
    double best_cut = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 6; ++trial) {
        auto part = grow(current, k, total, cap, rng);
        refine(current, part, k, cap, rng);
        const double cut = graph_cut(current, part);
        if (cut < best_cut) {
            best_cut = cut;
            best_part = part;
        }
    }
    std::vector<int> part = std::move(best_part);
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
        std::vector<int> finer(it->coarse_of.size());
        for (std::size_t v = 0; v < finer.size(); ++v) finer[v] = part[static_cast<std::size_t>(it->coarse_of[v])];
        part = std::move(finer);
        refine(it->graph, part, k, cap, rng);
    }
    return part;
}

}  // namespace

std::vector<std::vector<NodeId>> Partitioning::members() const {
    std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(k));
    for (std::size_t v = 0; v < part.size(); ++v) out[static_cast<std::size_t>(part[v])].push_back(static_cast<NodeId>(v));
    return out;
}

std::vector<int> Partitioning::sizes() const {
    std::vector<int> out(static_cast<std::size_t>(k), 0);
    for (int p : part) ++out[static_cast<std::size_t>(p)];
    return out;
}

int max_part_size(int n, int k, double imbalance_tolerance) {
    const int even = (n + k - 1) / k;
    return std::max(even, static_cast<int>(std::floor(even * (1.0 + imbalance_tolerance) + 1e-9)));
}

double edge_weight(const Edge& e) { return e.u ? *e.u * e.p : e.p; }

double cut_weight(const UncertainNetwork& net, const Partitioning& parts) {
    double cut = 0.0;
    auto visit = [&](const Edge& e) {
        if (parts.part[static_cast<std::size_t>(e.src)] != parts.part[static_cast<std::size_t>(e.dst)]) cut += edge_weight(e);
    };
    for (const Edge& e : net.certain_edges()) visit(e);
    for (const Edge& e : net.uncertain_edges()) visit(e);
    return cut;
}

double total_edge_weight(const UncertainNetwork& net) {
    double total = 0.0;
    for (const Edge& e : net.certain_edges()) total += edge_weight(e);
    for (const Edge& e : net.uncertain_edges()) total += edge_weight(e);
    return total;
}

Partitioning partition(const UncertainNetwork& net, int k, double imbalance_tolerance, std::uint64_t seed) {
    const int n = net.size();
    if (k < 1 || k > n) throw ValidationError(fmt::format("partition: k = {} must be in [1, {}]", k, n));
    if (imbalance_tolerance < 0.0) throw ValidationError("partition: imbalance tolerance must be >= 0");
    Partitioning result;
    result.k = k;
    if (k == 1) {
        result.part.assign(static_cast<std::size_t>(n), 0);
        return result;
    }
    const int cap = max_part_size(n, k, imbalance_tolerance);
    const Graph g = from_network(net);
    Rng rng = make_rng(derive_seed(seed, 0x9a27));

    double best_cut = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < 3; ++attempt) {
        auto part = multilevel(g, k, cap, rng);
        repair(g, part, k, cap);
        refine(g, part, k, cap, rng);
        const double cut = graph_cut(g, part);
        if (cut < best_cut) {
            best_cut = cut;
            result.part = std::move(part);
        }
    }
    return result;
}

}  // namespace dime
