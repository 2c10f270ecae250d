#pragma once
// Brute-force reference computations for tests. Deliberately naive and
// independent of the library's own exact code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "dime/kernels/cascade_kernels.hpp"
#include "dime/netcore/network.hpp"

namespace oracle {

using dime::Edge;
using dime::NodeId;
using dime::UncertainNetwork;

struct PlainEdge {
    int src, dst;
    double p;
    bool uncertain;
    double u;
};

inline std::vector<PlainEdge> plain_edges(const UncertainNetwork& net) {
    std::vector<PlainEdge> out;
    for (const Edge& e : net.certain_edges()) out.push_back({e.src, e.dst, e.p, false, 1.0});
    for (const Edge& e : net.uncertain_edges()) out.push_back({e.src, e.dst, e.p, true, *e.u});
    return out;
}

// Distribution over influenced sets after `steps` synchronous rounds with
// the given edges present, by enumerating every subset of newly activated
// nodes per round.
inline std::map<unsigned, double> advance(const std::vector<PlainEdge>& edges, const std::vector<bool>& present, int n,
                                          std::map<unsigned, double> dist, int steps) {
    for (int t = 0; t < steps; ++t) {
        std::map<unsigned, double> next;
        for (auto [w, pr] : dist) {
            std::vector<double> fire(static_cast<std::size_t>(n), 0.0);
            for (int v = 0; v < n; ++v) {
                if (w >> v & 1U) continue;
                double stay = 1.0;
                for (std::size_t e = 0; e < edges.size(); ++e) {
                    if (present[e] && edges[e].dst == v && (w >> edges[e].src & 1U)) stay *= 1.0 - edges[e].p;
                }
                fire[static_cast<std::size_t>(v)] = 1.0 - stay;
            }
            std::vector<int> open;
            for (int v = 0; v < n; ++v) {
                if (fire[static_cast<std::size_t>(v)] > 0.0) open.push_back(v);
            }
            for (unsigned sub = 0; sub < (1U << open.size()); ++sub) {
                double pr2 = pr;
                unsigned add = 0;
                for (std::size_t i = 0; i < open.size(); ++i) {
                    const double f = fire[static_cast<std::size_t>(open[i])];
                    if (sub >> i & 1U) {
                        pr2 *= f;
                        add |= 1U << open[i];
                    } else {
                        pr2 *= 1.0 - f;
                    }
                }
                if (pr2 > 0.0) next[w | add] += pr2;
            }
        }
        dist = std::move(next);
    }
    return dist;
}

inline double mean_size(const std::map<unsigned, double>& dist) {
    double mean = 0.0;
    for (auto [w, pr] : dist) mean += pr * __builtin_popcount(w);
    return mean;
}

// Expected final number of influenced nodes for an open-loop plan
// (plan[t] = nodes seeded in round t, then `steps` cascade rounds),
// averaged over every F vector.
inline double expected_plan_spread(const UncertainNetwork& net, const std::vector<std::vector<int>>& plan,
                                   int steps) {
    const auto edges = plain_edges(net);
    std::vector<int> unc;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (edges[i].uncertain) unc.push_back(static_cast<int>(i));
    }
    const int n = net.size();
    double total = 0.0;
    for (unsigned fx = 0; fx < (1U << unc.size()); ++fx) {
        double pf = 1.0;
        std::vector<bool> present(edges.size(), true);
        for (std::size_t j = 0; j < unc.size(); ++j) {
            const bool on = fx >> j & 1U;
            present[static_cast<std::size_t>(unc[j])] = on;
            pf *= on ? edges[static_cast<std::size_t>(unc[j])].u : 1.0 - edges[static_cast<std::size_t>(unc[j])].u;
        }
        std::map<unsigned, double> dist{{0U, 1.0}};
        for (const auto& seeds : plan) {
            std::map<unsigned, double> seeded;
            for (const auto& [w0, pr] : dist) {
                unsigned w = w0;
                for (int v : seeds) w |= 1U << v;
                seeded[w] += pr;
            }
            dist = advance(edges, present, n, std::move(seeded), steps);
        }
        total += pf * mean_size(dist);
    }
    return total;
}

// Single-chance cascade: an edge tries only in the round right after its
// source became influenced. Uses the same per-(round, edge) coins as the
// library kernels, so it is coupled with the repeated-activation cascade.
inline std::vector<std::uint32_t> single_chance(const std::vector<std::int32_t>& src, const std::vector<std::int32_t>& dst,
                                                const std::vector<std::int32_t>& limit, std::vector<std::uint32_t> w,
                                                const std::vector<std::uint64_t>& keys) {
    std::vector<std::uint32_t> fresh = w;
    for (std::uint64_t key : keys) {
        std::vector<std::uint32_t> next = w, newly(w.size(), 0);
        for (std::size_t e = 0; e < src.size(); ++e) {
            if (limit[e] < 0 || !fresh[static_cast<std::size_t>(src[e])] || w[static_cast<std::size_t>(dst[e])]) continue;
            const std::uint32_t draw = dime::kernels::edge_draw(key, static_cast<std::uint32_t>(e));
            if (static_cast<std::int32_t>(draw >> 1) <= limit[e]) {
                next[static_cast<std::size_t>(dst[e])] = 1;
                newly[static_cast<std::size_t>(dst[e])] = 1;
            }
        }
        w = std::move(next);
        fresh = std::move(newly);
    }
    return w;
}

// Copeland winner by explicit pairwise tallies. Rankings are lists of
// candidate ids, best first; returns the winning id (ties: smallest id).
inline int copeland_winner(const std::vector<std::vector<int>>& rankings) {
    std::vector<int> cands = rankings.front();
    std::sort(cands.begin(), cands.end());
    int best = -1, best_score = 0;
    for (int a : cands) {
        int score = 0;
        for (int b : cands) {
            if (a == b) continue;
            int prefer_a = 0, prefer_b = 0;
            for (const auto& r : rankings) {
                const auto pa = std::find(r.begin(), r.end(), a) - r.begin();
                const auto pb = std::find(r.begin(), r.end(), b) - r.begin();
                (pa < pb ? prefer_a : prefer_b)++;
            }
            if (prefer_a > prefer_b) ++score;
            if (prefer_b > prefer_a) --score;
        }
        if (best < 0 || score > best_score) {
            best = a;
            best_score = score;
        }
    }
    return best;
}

// C(n, m) / 2^n by Pascal's triangle in long double.
inline long double binomial_weight(int n, int m) {
    std::vector<long double> row{1.0L};
    for (int i = 0; i < n; ++i) {
        std::vector<long double> next(row.size() + 1, 0.0L);
        for (std::size_t j = 0; j < row.size(); ++j) {
            next[j] += row[j] / 2;
            next[j + 1] += row[j] / 2;
        }
        row = std::move(next);
    }
    return row[static_cast<std::size_t>(m)];
}

}  // namespace oracle
