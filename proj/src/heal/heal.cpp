#include "dime/heal/heal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "dime/core/error.hpp"

namespace dime {
namespace {

// Greedy rollout pick: largest 1 + sum p(e) over present out-edges to
// un-influenced nodes; lowest id on ties. -1 when everything is influenced.
NodeId greedy_pick(const UncertainNetwork& subnet, std::span<const std::uint8_t> kept, const NodeMask& w) {
    const std::size_t nc = subnet.certain_edges().size();
    NodeId best = -1;
    double best_gain = -1.0;
    for (NodeId v = 0; v < subnet.size(); ++v) {
        if (w.test(v)) continue;
        double gain = 1.0;
        for (std::size_t g : subnet.out_edges(v)) {
            if (g >= nc && !kept[g - nc]) continue;
            const Edge& e = subnet.edge(g);
            if (!w.test(e.dst)) gain += e.p;
        }
        if (gain > best_gain) {
            best_gain = gain;
            best = v;
        }
    }
    return best;
}

std::vector<std::uint8_t> bits_of(std::uint64_t x, std::size_t n) {
    std::vector<std::uint8_t> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = static_cast<std::uint8_t>((x >> i) & 1U);
    return f;
}

// Picks `budget` nodes inside one intermediate POMDP by repeated single-node
// TASP calls; each pick joins the prefix of the next.
std::vector<NodeId> pick_in_part(const IntermediatePomdp& ip, const Belief& b, const std::vector<NodeId>& eligible,
                                 std::vector<int> future_budgets, int steps, const TaspConfig& cfg, Rng& rng,
                                 const Deadline& deadline, PartDiagnostics& diag) {
    const auto particles = restrict_particles(b, ip.nodes);
    std::vector<NodeId> local_eligible;
    for (NodeId v : eligible) {
        auto it = std::lower_bound(ip.nodes.begin(), ip.nodes.end(), v);
        if (it != ip.nodes.end() && *it == v) local_eligible.push_back(static_cast<NodeId>(it - ip.nodes.begin()));
    }
    std::vector<NodeId> prefix;
    for (int j = 0; j < ip.budget && !local_eligible.empty(); ++j) {
        std::vector<Action> actions;
        for (NodeId v : local_eligible) actions.emplace_back(std::vector<NodeId>{v});
        RolloutSchedule schedule{Action(prefix), future_budgets, steps};
        TaspResult r = tasp_solve(ip, particles, actions, schedule, cfg, rng, deadline);
        const NodeId local = r.action.nodes().front();
        if (j == 0) {
            for (std::size_t i = 0; i < actions.size(); ++i) {
                diag.expected.emplace_back(ip.nodes[static_cast<std::size_t>(actions[i].nodes().front())], r.expected[i]);
            }
        }
        prefix.push_back(local);
        local_eligible.erase(std::find(local_eligible.begin(), local_eligible.end(), local));
        diag.picked.push_back(ip.nodes[static_cast<std::size_t>(local)]);
    }
    return diag.picked;
}

}  // namespace

IntermediatePomdp make_intermediate(const UncertainNetwork& updated, int part_index, std::vector<NodeId> nodes,
                                    int budget) {
    std::sort(nodes.begin(), nodes.end());
    if (static_cast<int>(nodes.size()) < budget) {
        throw ValidationError(fmt::format("partition {} has {} nodes but budget {}", part_index, nodes.size(), budget));
    }
    IntermediatePomdp ip;
    ip.part_index = part_index;
    ip.subnetwork = induced_subnetwork(updated, nodes);
    ip.nodes = std::move(nodes);
    ip.budget = budget;
    return ip;
}

std::vector<IntermediatePomdp> build_intermediate_pomdps(const UncertainNetwork& net, const Belief& b, int n_parts,
                                                         int budget, double imbalance_tolerance,
                                                         std::uint64_t partition_seed) {
    if (n_parts < 1 || n_parts > net.size()) throw ValidationError("n_parts must be in [1, N]");
    const UncertainNetwork updated = apply_knowledge(net, b.known);
    const Partitioning parts = partition(updated, n_parts, imbalance_tolerance, partition_seed);
    std::vector<IntermediatePomdp> out;
    auto members = parts.members();
    for (int p = 0; p < n_parts; ++p) out.push_back(make_intermediate(updated, p, members[static_cast<std::size_t>(p)], budget));
    return out;
}

std::vector<NodeMask> restrict_particles(const Belief& b, std::span<const NodeId> nodes) {
    std::vector<NodeMask> out;
    out.reserve(b.particles.size());
    for (const auto& p : b.particles) {
        NodeMask m(static_cast<int>(nodes.size()));
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (p.w.test(nodes[i])) m.set(static_cast<NodeId>(i));
        }
        out.push_back(std::move(m));
    }
    return out;
}

AlphaList alpha_list(const CascadeModel& instance, const UncertainNetwork& subnet, std::span<const std::uint8_t> kept,
                     std::span<const NodeMask> particles, std::span<const Action> actions,
                     const RolloutSchedule& schedule, int reps, std::uint64_t seed) {
    if (reps < 1) throw ValidationError("rollout_reps must be >= 1");
    if (particles.empty()) throw ValidationError("alpha_list needs at least one particle");
    AlphaList alpha;
    alpha.values.assign(actions.size(), 0.0);
    std::uniform_int_distribution<std::size_t> pick(0, particles.size() - 1);
    for (std::size_t i = 0; i < actions.size(); ++i) {
        double total = 0.0;
        for (int r = 0; r < reps; ++r) {
            Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
            NodeMask w = particles[pick(rng)];
            const int before = w.count();
            for (NodeId v : schedule.prefix.nodes()) w.set(v);
            for (NodeId v : actions[i].nodes()) w.set(v);
            instance.run(w, schedule.steps, rng());
            for (int budget : schedule.future_budgets) {
                for (int j = 0; j < budget; ++j) {
                    const NodeId v = greedy_pick(subnet, kept, w);
                    if (v < 0) break;
                    w.set(v);
                }
                instance.run(w, schedule.steps, rng());
            }
            total += w.count() - before;
        }
        alpha.values[i] = total / reps;
    }
    return alpha;
}

std::vector<double> aggregate_alpha(std::span<const AlphaList> alphas, std::span<const double> log_probabilities) {
    if (alphas.empty() || alphas.size() != log_probabilities.size()) {
        throw ValidationError("aggregate_alpha: one probability per alpha list required");
    }
    const double top = *std::max_element(log_probabilities.begin(), log_probabilities.end());
    std::vector<double> weight(alphas.size());
    double z = 0.0;
    for (std::size_t d = 0; d < alphas.size(); ++d) {
        weight[d] = std::isfinite(top) ? std::exp(log_probabilities[d] - top) : 1.0;
        z += weight[d];
    }
    std::vector<double> r(alphas.front().values.size(), 0.0);
    for (std::size_t d = 0; d < alphas.size(); ++d) {
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += weight[d] / z * alphas[d].values[i];
    }
    return r;
}

TaspResult tasp_solve(const IntermediatePomdp& ip, std::span<const NodeMask> particles,
                      std::span<const Action> actions, const RolloutSchedule& schedule, const TaspConfig& cfg,
                      Rng& rng, const Deadline& deadline) {
    if (actions.empty()) throw ValidationError("TASP needs a non-empty action list");
    if (cfg.n_instances < 1) throw ValidationError("TASP needs Delta >= 1");
    const UncertainNetwork& subnet = ip.subnetwork;
    const std::size_t n_unc = subnet.uncertain_count();

    // Distinct instances with their multiplicity in the sample.
    std::map<std::vector<std::uint8_t>, int> drawn;
    if (cfg.exhaustive) {
        if (n_unc > 16) throw ValidationError("exhaustive TASP limited to 16 uncertain edges");
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << n_unc); ++x) drawn[bits_of(x, n_unc)] = 1;
    } else {
        for (int d = 0; d < cfg.n_instances; ++d) {
            InstantiatedNetwork inst = sample_instance(subnet, rng);
            ++drawn[std::vector<std::uint8_t>(inst.kept().begin(), inst.kept().end())];
        }
    }

    TaspResult result;
    result.actions.assign(actions.begin(), actions.end());
    std::vector<double> logp;
    const std::uint64_t root = rng();
    int index = 0;
    for (const auto& [kept, count] : drawn) {
        deadline.check("TASP");
        const CascadeModel model(subnet, kept);
        AlphaList a = alpha_list(model, subnet, kept, particles, actions, schedule, cfg.rollout_reps * count,
                                 derive_seed(root, static_cast<std::uint64_t>(index)));
        a.instance_index = index++;
        logp.push_back(log_instance_probability(subnet, kept));
        result.alphas.push_back(std::move(a));
        result.instances.push_back(kept);
    }
    result.expected = aggregate_alpha(result.alphas, logp);
    {
        const double top = *std::max_element(logp.begin(), logp.end());
        double z = 0.0;
        for (double lp : logp) z += std::exp(lp - top);
        for (double lp : logp) result.weights.push_back(std::exp(lp - top) / z);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < actions.size(); ++i) {
        const double a = result.expected[i], b = result.expected[best];
        if (a > b || (a == b && actions[i] < actions[best])) best = i;
    }
    result.action = actions[best];
    return result;
}

HealResult heal_plan(const UncertainNetwork& net, const Belief& b, int k, int rounds, int steps, int round,
                     const HealConfig& cfg, Rng& rng, const Deadline& deadline) {
    if (k < 1 || k > net.size()) throw ValidationError("HEAL: K must be in [1, N]");
    if (round < 1 || round > rounds) throw ValidationError("HEAL: round outside [1, T]");
    const UncertainNetwork updated = apply_knowledge(net, b.known);
    const Partitioning parts = partition(updated, k, cfg.imbalance_tolerance, cfg.partition_seed);
    const auto members = parts.members();

    std::vector<std::vector<NodeId>> eligible(static_cast<std::size_t>(k));
    for (int p = 0; p < k; ++p) {
        for (NodeId v : members[static_cast<std::size_t>(p)]) {
            if (!b.chosen.test(v)) eligible[static_cast<std::size_t>(p)].push_back(v);
        }
    }
    std::vector<int> budget(static_cast<std::size_t>(k), 1);
    for (int p = 0; p < k; ++p) {
        if (!eligible[static_cast<std::size_t>(p)].empty()) continue;
        budget[static_cast<std::size_t>(p)] = 0;
        // Hand the pick to the part with the most spare eligible nodes.
        int target = -1;
        long spare = 0;
        for (int q = 0; q < k; ++q) {
            const long s = static_cast<long>(eligible[static_cast<std::size_t>(q)].size()) - budget[static_cast<std::size_t>(q)];
            if (s > spare) {
                spare = s;
                target = q;
            }
        }
        if (target < 0) throw ValidationError("HEAL: fewer than K eligible nodes remain");
        ++budget[static_cast<std::size_t>(target)];
    }

    HealResult result;
    result.cut_weight = cut_weight(updated, parts);
    std::vector<NodeId> chosen;
    const std::vector<int> future(static_cast<std::size_t>(rounds - round), 1);
    for (int p = 0; p < k; ++p) {
        PartDiagnostics diag;
        diag.part_index = p;
        diag.size = static_cast<int>(members[static_cast<std::size_t>(p)].size());
        diag.budget = budget[static_cast<std::size_t>(p)];
        if (diag.budget > 0) {
            IntermediatePomdp ip = make_intermediate(updated, p, members[static_cast<std::size_t>(p)], diag.budget);
            Rng part_rng = make_rng(derive_seed(rng(), static_cast<std::uint64_t>(p)));
            auto picked = pick_in_part(ip, b, eligible[static_cast<std::size_t>(p)], future, steps, cfg.tasp, part_rng,
                                       deadline, diag);
            chosen.insert(chosen.end(), picked.begin(), picked.end());
        }
        result.parts.push_back(std::move(diag));
    }
    result.action = Action(std::move(chosen));
    return result;
}

HealResult heal_t_plan(const UncertainNetwork& net, const Belief& b, int k, int rounds, int steps, int round,
                       const HealConfig& cfg, Rng& rng, const Deadline& deadline) {
    if (k < 1 || k > net.size()) throw ValidationError("HEAL-T: K must be in [1, N]");
    if (rounds < 1 || rounds > net.size()) throw ValidationError("HEAL-T: T must be in [1, N]");
    if (round < 1 || round > rounds) throw ValidationError("HEAL-T: round outside [1, T]");
    // The T-way split is made once on the original network so that part i
    // means the same node set in every round.
    const Partitioning parts = partition(net, rounds, cfg.imbalance_tolerance, cfg.partition_seed);
    const auto members = parts.members();
    const int p = round - 1;

    std::vector<NodeId> nodes = members[static_cast<std::size_t>(p)];
    std::vector<NodeId> eligible;
    for (NodeId v : nodes) {
        if (!b.chosen.test(v)) eligible.push_back(v);
    }
    if (static_cast<int>(eligible.size()) < k) {
        // Borrow: parts ranked by connection weight to part p, nodes within a
        // part by degree centrality.
        const UncertainNetwork updated = apply_knowledge(net, b.known);
        const auto dc = dc_scores(updated);
        std::vector<double> link(static_cast<std::size_t>(rounds), 0.0);
        auto tally = [&](const Edge& e) {
            const int a = parts.part[static_cast<std::size_t>(e.src)], c = parts.part[static_cast<std::size_t>(e.dst)];
            if (a == p && c != p) link[static_cast<std::size_t>(c)] += edge_weight(e);
            if (c == p && a != p) link[static_cast<std::size_t>(a)] += edge_weight(e);
        };
        for (const Edge& e : updated.certain_edges()) tally(e);
        for (const Edge& e : updated.uncertain_edges()) tally(e);
        std::vector<NodeId> outside;
        for (NodeId v = 0; v < net.size(); ++v) {
            if (parts.part[static_cast<std::size_t>(v)] != p && !b.chosen.test(v)) outside.push_back(v);
        }
        std::stable_sort(outside.begin(), outside.end(), [&](NodeId x, NodeId y) {
            const double lx = link[static_cast<std::size_t>(parts.part[static_cast<std::size_t>(x)])];
            const double ly = link[static_cast<std::size_t>(parts.part[static_cast<std::size_t>(y)])];
            if (lx != ly) return lx > ly;
            return dc[static_cast<std::size_t>(x)] > dc[static_cast<std::size_t>(y)];
        });
        const std::size_t need = static_cast<std::size_t>(k) - eligible.size();
        if (outside.size() < need) throw ValidationError("HEAL-T: fewer than K eligible nodes remain");
        for (std::size_t i = 0; i < need; ++i) {
            nodes.push_back(outside[i]);
            eligible.push_back(outside[i]);
        }
        std::sort(eligible.begin(), eligible.end());
    }

    const UncertainNetwork updated = apply_knowledge(net, b.known);
    IntermediatePomdp ip = make_intermediate(updated, p, nodes, k);
    HealResult result;
    result.cut_weight = cut_weight(updated, parts);
    PartDiagnostics diag;
    diag.part_index = p;
    diag.size = static_cast<int>(ip.nodes.size());
    diag.budget = k;
    const std::vector<int> future(static_cast<std::size_t>(rounds - round), 0);
    Rng part_rng = make_rng(derive_seed(rng(), static_cast<std::uint64_t>(p)));
    auto picked = pick_in_part(ip, b, eligible, future, steps, cfg.tasp, part_rng, deadline, diag);
    result.action = Action(std::move(picked));
    result.parts.push_back(std::move(diag));
    return result;
}

}  // namespace dime
