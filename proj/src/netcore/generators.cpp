#include "dime/netcore/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "dime/core/error.hpp"

namespace dime {
namespace {

void check_prob(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(fmt::format("{} = {} outside [0, 1]", what, p));
}

void check_unc(const UncertaintyParams& unc) {
    check_prob(unc.uncertain_frac, "uncertain_frac");
    check_prob(unc.p_range.first, "p_range.lo");
    check_prob(unc.p_range.second, "p_range.hi");
    check_prob(unc.u_range.first, "u_range.lo");
    check_prob(unc.u_range.second, "u_range.hi");
    if (unc.p_range.first > unc.p_range.second || unc.u_range.first > unc.u_range.second) {
        throw ValidationError("probability ranges must satisfy lo <= hi");
    }
}

double draw_in(Rng& rng, std::pair<double, double> range) {
    if (range.first == range.second) return range.first;
    return range.first + (range.second - range.first) * uniform01(rng);
}

// Assigns probabilities and splits generated (src, dst) pairs into certain /
// uncertain lists, keeping generation order in both. Edge ids are the
// generation positions.
UncertainNetwork finish(int n, const std::vector<std::pair<NodeId, NodeId>>& pairs, const UncertaintyParams& unc,
                        Rng& rng, std::string provenance) {
    const std::size_t m = pairs.size();
    const auto n_unc = static_cast<std::size_t>(std::llround(unc.uncertain_frac * static_cast<double>(m)));
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::uint8_t> is_unc(m, 0);
    for (std::size_t i = 0; i < n_unc; ++i) is_unc[order[i]] = 1;

    std::vector<Edge> certain, uncertain;
    for (std::size_t i = 0; i < m; ++i) {
        Edge e;
        e.id = static_cast<EdgeId>(i);
        e.src = pairs[i].first;
        e.dst = pairs[i].second;
        e.p = draw_in(rng, unc.p_range);
        if (is_unc[i]) {
            e.u = draw_in(rng, unc.u_range);
            uncertain.push_back(e);
        } else {
            certain.push_back(e);
        }
    }
    NetworkMeta meta;
    meta.generator = std::move(provenance);
    return UncertainNetwork(n, std::move(certain), std::move(uncertain), std::move(meta));
}

std::vector<std::pair<NodeId, NodeId>> block_pairs(int n, int blocks, double p_in, double p_out, Rng& rng) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = 0; j < n; ++j) {
            if (i == j) continue;
            const double p = community_block(n, blocks, i) == community_block(n, blocks, j) ? p_in : p_out;
            // One draw per pair regardless of p keeps streams aligned across parameters.
            const double r = uniform01(rng);
            if (r < p) pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

}  // namespace

int community_block(int n, int blocks, NodeId v) {
    return static_cast<int>((static_cast<std::int64_t>(v) * blocks) / n);
}

UncertainNetwork generate_er(int n, double edge_p, const UncertaintyParams& unc, std::uint64_t seed) {
    if (n < 1) throw ValidationError("generate_er: n must be >= 1");
    check_prob(edge_p, "edge_p");
    check_unc(unc);
    Rng rng = make_rng(seed);
    auto pairs = block_pairs(n, 1, edge_p, edge_p, rng);
    auto net = finish(n, pairs, unc, rng, fmt::format("er n={} edge_p={} seed={}", n, edge_p, seed));
    return net;
}

UncertainNetwork generate_community(int n, int blocks, double p_in, double p_out, const UncertaintyParams& unc,
                                    std::uint64_t seed) {
    if (n < 1) throw ValidationError("generate_community: n must be >= 1");
    if (blocks < 1 || blocks > n) throw ValidationError("generate_community: blocks must be in [1, n]");
    check_prob(p_in, "p_in");
    check_prob(p_out, "p_out");
    if (p_in < p_out) throw ValidationError("generate_community: requires p_in >= p_out");
    check_unc(unc);
    Rng rng = make_rng(seed);
    auto pairs = block_pairs(n, blocks, p_in, p_out, rng);
    return finish(n, pairs, unc, rng,
                  fmt::format("community n={} blocks={} p_in={} p_out={} seed={}", n, blocks, p_in, p_out, seed));
}

UncertainNetwork generate_ws(int n, int k_ring, double rewire_p, const UncertaintyParams& unc, std::uint64_t seed) {
    if (n < 1) throw ValidationError("generate_ws: n must be >= 1");
    if (k_ring < 0 || k_ring % 2 != 0 || k_ring >= n) throw ValidationError("generate_ws: k_ring must be even and < n");
    check_prob(rewire_p, "rewire_p");
    check_unc(unc);
    Rng rng = make_rng(seed);

    auto key = [](NodeId a, NodeId b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    std::vector<std::pair<NodeId, NodeId>> ties;
    std::set<std::pair<NodeId, NodeId>> present;
    for (NodeId i = 0; i < n; ++i) {
        for (int j = 1; j <= k_ring / 2; ++j) {
            const NodeId t = static_cast<NodeId>((i + j) % n);
            ties.emplace_back(i, t);
            present.insert(key(i, t));
        }
    }
    std::uniform_int_distribution<NodeId> pick(0, n - 1);
    for (auto& [a, b] : ties) {
        if (!bernoulli(rng, rewire_p)) continue;
        // Rewire the far endpoint to a uniform node, avoiding self-loops and
        // duplicate ties; give up after a bounded number of tries.
        for (int attempt = 0; attempt < 4 * n; ++attempt) {
            const NodeId t = pick(rng);
            if (t == a || present.count(key(a, t))) continue;
            present.erase(key(a, b));
            present.insert(key(a, t));
            b = t;
            break;
        }
    }
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(ties.size() * 2);
    for (auto [a, b] : ties) {
        pairs.emplace_back(a, b);
        pairs.emplace_back(b, a);
    }
    return finish(n, pairs, unc, rng, fmt::format("ws n={} k_ring={} rewire_p={} seed={}", n, k_ring, rewire_p, seed));
}

}  // namespace dime
