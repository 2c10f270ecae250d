#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dime/core/error.hpp"
#include "dime/heal/heal.hpp"
#include "dime/netcore/generators.hpp"
#include "oracle.hpp"

using namespace dime;

namespace {

Edge certain(EdgeId id, NodeId s, NodeId d, double p) { return {id, s, d, p, std::nullopt}; }
Edge uncertain(EdgeId id, NodeId s, NodeId d, double p, double u) { return {id, s, d, p, u}; }

UncertainNetwork two_cliques(bool with_uncertain = false) {
    std::vector<Edge> c, u;
    EdgeId id = 0;
    for (int base : {0, 5}) {
        for (int a = 0; a < 5; ++a) {
            for (int b = 0; b < 5; ++b) {
                if (a == b) continue;
                if (with_uncertain && a == 0 && b == 1) {
                    u.push_back(uncertain(id++, base + a, base + b, 0.3, 0.5));
                } else {
                    c.push_back(certain(id++, base + a, base + b, 0.3));
                }
            }
        }
    }
    return UncertainNetwork(10, c, u);
}

Belief fresh_belief(const UncertainNetwork& net, int particles = 32, std::uint64_t seed = 1) {
    Rng rng = make_rng(seed);
    return initial_belief(net, particles, rng);
}

std::vector<Action> singletons(int n) {
    std::vector<Action> out;
    for (int v = 0; v < n; ++v) out.emplace_back(std::vector<NodeId>{v});
    return out;
}

IntermediatePomdp whole(const UncertainNetwork& net, int budget = 1) {
    std::vector<NodeId> nodes(static_cast<std::size_t>(net.size()));
    for (int v = 0; v < net.size(); ++v) nodes[static_cast<std::size_t>(v)] = v;
    return make_intermediate(net, 0, nodes, budget);
}

}  // namespace

TEST_CASE("intermediate POMDPs follow the partition and the observations") {
    const auto net = two_cliques(true);
    auto b = fresh_belief(net);
    const auto parts = build_intermediate_pomdps(net, b, 2, 1);
    REQUIRE(parts.size() == 2);
    std::set<std::vector<NodeId>> sets;
    for (const auto& ip : parts) {
        sets.insert(ip.nodes);
        CHECK(ip.subnetwork.edge_count() == 20);
    }
    CHECK(sets == std::set<std::vector<NodeId>>{{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}});

    // Observe edge 0->1 absent: it disappears from every subnetwork.
    Rng rng = make_rng(2);
    const EdgeId absent = net.uncertain_edges()[0].id;
    b = belief_update(net, b, Action({0}), Observation{{{absent, 0}}}, 1, rng);
    for (const auto& ip : build_intermediate_pomdps(net, b, 2, 1)) {
        CHECK_FALSE(ip.subnetwork.global_index_of(absent).has_value());
        CHECK(ip.subnetwork.uncertain_count() <= 1);
    }
    const auto one = build_intermediate_pomdps(net, fresh_belief(net), 1, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].subnetwork.edge_count() == net.edge_count());
    CHECK_THROWS_AS(build_intermediate_pomdps(net, b, 2, 6), ValidationError);
    CHECK_THROWS_AS(build_intermediate_pomdps(net, b, 11, 1), ValidationError);
}

TEST_CASE("alpha aggregation weighs instances by probability") {
    // The worked example: alpha = 10 on delta1 and 20 on delta2.
    const std::vector<AlphaList> alphas{{0, {10.0}}, {1, {20.0}}};
    const std::vector<double> logp{std::log(0.25), std::log(0.75)};
    CHECK(aggregate_alpha(alphas, logp)[0] == doctest::Approx(0.25 * 10 + 0.75 * 20));
    // Normalised over the sampled set when it does not cover all mass.
    const std::vector<double> partial{std::log(0.1), std::log(0.3)};
    CHECK(aggregate_alpha(alphas, partial)[0] == doctest::Approx(0.25 * 10 + 0.75 * 20));
    const std::vector<AlphaList> single{{0, {3.0, 7.0}}};
    const std::vector<double> lp{std::log(0.2)};
    CHECK(aggregate_alpha(single, lp) == std::vector<double>{3.0, 7.0});
}

TEST_CASE("alpha lists on a deterministic path") {
    // 0 -> 1 -> 2 -> 3 with p = 1, budget 1, horizon 2, one cascade round.
    const UncertainNetwork net(4, {certain(0, 0, 1, 1.0), certain(1, 1, 2, 1.0), certain(2, 2, 3, 1.0)}, {});
    const CascadeModel model(net, std::vector<std::uint8_t>{});
    const std::vector<NodeMask> particles{NodeMask(4)};
    const auto actions = singletons(4);
    const auto a2 = alpha_list(model, net, {}, particles, actions, {Action(), {1}, 1}, 3, 5);
    CHECK(a2.values == std::vector<double>{4, 4, 4, 3});
    // Horizon 1: immediate spread only.
    const auto a1 = alpha_list(model, net, {}, particles, actions, {Action(), {}, 2}, 3, 5);
    CHECK(a1.values == std::vector<double>{3, 3, 2, 1});
    // Taking every node at once yields the subnetwork size.
    const std::vector<Action> all{Action({0, 1, 2, 3})};
    CHECK(alpha_list(model, net, {}, particles, all, {Action(), {2}, 1}, 2, 5).values[0] == 4);
    CHECK_THROWS_AS(alpha_list(model, net, {}, particles, all, {Action(), {}, 1}, 0, 5), ValidationError);
}

TEST_CASE("exhaustive TASP equals the brute-force expectation at horizon 1") {
    // p = 1 everywhere so each instance's alpha is exact.
    const UncertainNetwork net(5,
                               {certain(0, 0, 1, 1.0), certain(1, 3, 4, 1.0)},
                               {uncertain(2, 1, 2, 1.0, 0.6), uncertain(3, 0, 3, 1.0, 0.3), uncertain(4, 2, 4, 1.0, 0.5),
                                uncertain(5, 4, 0, 1.0, 0.8)});
    const auto ip = whole(net);
    const std::vector<NodeMask> particles{NodeMask(5)};
    TaspConfig cfg;
    cfg.exhaustive = true;
    cfg.rollout_reps = 1;
    Rng rng = make_rng(3);
    const auto r = tasp_solve(ip, particles, singletons(5), {Action(), {}, 2}, cfg, rng);
    CHECK(r.instances.size() == 16);
    for (int v = 0; v < 5; ++v) {
        CHECK(std::abs(r.expected[static_cast<std::size_t>(v)] - oracle::expected_plan_spread(net, {{v}}, 2)) < 1e-12);
    }
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0));
}

TEST_CASE("TASP with a single instance returns that instance's argmax") {
    const UncertainNetwork net(4, {certain(0, 0, 1, 1.0)}, {uncertain(1, 2, 3, 1.0, 0.5), uncertain(2, 1, 2, 1.0, 0.5)});
    const auto ip = whole(net);
    const std::vector<NodeMask> particles{NodeMask(4)};
    TaspConfig cfg;
    cfg.n_instances = 1;
    Rng rng = make_rng(4);
    const auto r = tasp_solve(ip, particles, singletons(4), {Action(), {}, 3}, cfg, rng);
    REQUIRE(r.alphas.size() == 1);
    CHECK(r.expected == r.alphas[0].values);
    const auto best = std::max_element(r.expected.begin(), r.expected.end()) - r.expected.begin();
    CHECK(r.action == Action({static_cast<NodeId>(best)}));
}

TEST_CASE("sampled TASP agrees with the exhaustive expectation") {
    // 5-node subnetwork, budget 1, horizon 2, one cascade round per round.
    const UncertainNetwork net(5,
                               {certain(0, 0, 1, 0.7), certain(1, 1, 3, 0.5), certain(2, 3, 4, 0.4)},
                               {uncertain(3, 0, 2, 0.7, 0.8), uncertain(4, 2, 4, 0.6, 0.5), uncertain(5, 4, 0, 0.5, 0.3)});
    const auto edges = oracle::plain_edges(net);
    // Exact value of "take v, cascade, greedy pick, cascade" over all F.
    auto greedy = [&](unsigned w, const std::vector<bool>& present) {
        int best = -1;
        double best_gain = -1;
        for (int v = 0; v < 5; ++v) {
            if (w >> v & 1U) continue;
            double gain = 1;
            for (std::size_t e = 0; e < edges.size(); ++e) {
                if (present[e] && edges[e].src == v && !(w >> edges[e].dst & 1U)) gain += edges[e].p;
            }
            if (gain > best_gain) {
                best_gain = gain;
                best = v;
            }
        }
        return best;
    };
    std::vector<double> exact(5, 0.0);
    for (unsigned fx = 0; fx < 8; ++fx) {
        std::vector<bool> present(edges.size(), true);
        double pf = 1;
        for (int j = 0; j < 3; ++j) {
            const bool on = fx >> j & 1U;
            present[static_cast<std::size_t>(3 + j)] = on;
            pf *= on ? edges[static_cast<std::size_t>(3 + j)].u : 1 - edges[static_cast<std::size_t>(3 + j)].u;
        }
        for (int a = 0; a < 5; ++a) {
            for (auto [w, pr] : oracle::advance(edges, present, 5, {{1U << a, 1.0}}, 1)) {
                const int g = greedy(w, present);
                const unsigned w2 = g < 0 ? w : (w | 1U << g);
                exact[static_cast<std::size_t>(a)] +=
                    pf * pr * oracle::mean_size(oracle::advance(edges, present, 5, {{w2, 1.0}}, 1));
            }
        }
    }
    const int best = static_cast<int>(std::max_element(exact.begin(), exact.end()) - exact.begin());
    const auto ip = whole(net);
    const std::vector<NodeMask> particles{NodeMask(5)};
    TaspConfig cfg;
    cfg.n_instances = 32;
    cfg.rollout_reps = 64;
    int agree = 0;
    for (int run = 0; run < 100; ++run) {
        Rng rng = make_rng(derive_seed(21, run));
        agree += tasp_solve(ip, particles, singletons(5), {Action(), {1}, 1}, cfg, rng).action == Action({best}) ? 1 : 0;
    }
    CHECK(agree >= 90);
}

TEST_CASE("HEAL picks one node per part") {
    const auto net = two_cliques();
    const auto b = fresh_belief(net);
    HealConfig cfg;
    cfg.tasp.n_instances = 4;
    cfg.tasp.rollout_reps = 2;
    Rng rng = make_rng(5);
    const auto r = heal_plan(net, b, 2, 3, 1, 1, cfg, rng);
    REQUIRE(r.action.size() == 2);
    CHECK(r.action.nodes()[0] < 5);
    CHECK(r.action.nodes()[1] >= 5);
    CHECK(r.parts.size() == 2);
    CHECK(r.cut_weight == doctest::Approx(0.0));

    const auto k1 = heal_plan(net, b, 1, 1, 1, 1, cfg, rng);
    CHECK(k1.action.size() == 1);
    CHECK(k1.parts[0].size == 10);

    // Exhausted part: all of clique 0 already chosen.
    Belief used = b;
    for (NodeId v = 0; v < 5; ++v) used.chosen.set(v);
    const auto moved = heal_plan(net, used, 2, 3, 1, 2, cfg, rng);
    REQUIRE(moved.action.size() == 2);
    for (NodeId v : moved.action.nodes()) CHECK(v >= 5);

    Rng a = make_rng(8), c = make_rng(8);
    CHECK(heal_plan(net, b, 2, 3, 1, 1, cfg, a).action == heal_plan(net, b, 2, 3, 1, 1, cfg, c).action);
    CHECK_THROWS_AS(heal_plan(net, b, 2, 3, 1, 4, cfg, rng), ValidationError);
    CHECK_THROWS_AS(heal_plan(net, b, 11, 3, 1, 1, cfg, rng), ValidationError);
}

TEST_CASE("HEAL-T takes round i's picks from part i") {
    const auto net = generate_community(40, 2, 0.2, 0.01, {0.5, {0.1, 0.4}, {0.3, 0.8}}, 6);
    const auto b = fresh_belief(net);
    HealConfig cfg;
    cfg.tasp.n_instances = 4;
    cfg.tasp.rollout_reps = 2;
    const auto parts = partition(net, 4, cfg.imbalance_tolerance, cfg.partition_seed);
    for (int round = 1; round <= 4; ++round) {
        Rng rng = make_rng(round);
        const auto r = heal_t_plan(net, b, 3, 4, 1, round, cfg, rng);
        REQUIRE(r.action.size() == 3);
        for (NodeId v : r.action.nodes()) CHECK(parts.part[static_cast<std::size_t>(v)] == round - 1);
    }
    Rng rng = make_rng(1);
    const auto t1 = heal_t_plan(net, b, 4, 1, 1, 1, cfg, rng);
    CHECK(t1.action.size() == 4);
    CHECK(t1.parts[0].size == 40);

    // Undersized part borrows from elsewhere.
    Belief used = b;
    for (NodeId v = 0; v < 40; ++v) {
        if (parts.part[static_cast<std::size_t>(v)] == 0) used.chosen.set(v);
    }
    const auto borrowed = heal_t_plan(net, used, 2, 4, 1, 1, cfg, rng);
    CHECK(borrowed.action.size() == 2);
    for (NodeId v : borrowed.action.nodes()) CHECK_FALSE(used.chosen.test(v));
}
