#include "dime/psinet/psinet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>

#include <fmt/format.h>

#include "dime/core/error.hpp"

namespace dime {
namespace {

// Enumerates K-subsets of indices into `score` (sorted descending) in
// non-increasing order of score sum, best first, without materialising all
// C(n, K) subsets.
std::vector<std::vector<int>> best_subsets(const std::vector<double>& score, int k, std::size_t limit) {
    const int n = static_cast<int>(score.size());
    auto sum_of = [&](const std::vector<int>& idx) {
        double s = 0.0;
        for (int i : idx) s += score[static_cast<std::size_t>(i)];
        return s;
    };
    using Entry = std::pair<double, std::vector<int>>;
    auto cmp = [](const Entry& a, const Entry& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
    std::set<std::vector<int>> seen;
    std::vector<int> first(static_cast<std::size_t>(k));
    std::iota(first.begin(), first.end(), 0);
    heap.emplace(sum_of(first), first);
    seen.insert(first);

    std::vector<std::vector<int>> out;
    double cutoff = 0.0;
    while (!heap.empty()) {
        auto [s, idx] = heap.top();
        if (out.size() >= limit && s < cutoff) break;
        heap.pop();
        out.push_back(idx);
        if (out.size() == limit) cutoff = s;
        for (int j = 0; j < k; ++j) {
            const int bound = j + 1 < k ? idx[static_cast<std::size_t>(j + 1)] : n;
            if (idx[static_cast<std::size_t>(j)] + 1 >= bound) continue;
            auto succ = idx;
            ++succ[static_cast<std::size_t>(j)];
            if (seen.insert(succ).second) heap.emplace(sum_of(succ), std::move(succ));
        }
    }
    return out;
}

}  // namespace

VoteVariant parse_vote_variant(std::string_view s) {
    if (s == "s" || s == "S") return VoteVariant::plurality;
    if (s == "w" || s == "W") return VoteVariant::weighted;
    if (s == "c" || s == "C") return VoteVariant::copeland;
    throw ValidationError(fmt::format("unknown PSINET variant '{}' (expected s, w or c)", s));
}

char vote_variant_letter(VoteVariant v) {
    switch (v) {
        case VoteVariant::plurality:
            return 's';
        case VoteVariant::weighted:
            return 'w';
        case VoteVariant::copeland:
            return 'c';
    }
    return '?';
}

std::vector<Action> candidate_actions(const UncertainNetwork& net, const Belief& b, int k, int pool_size) {
    if (pool_size < 1) throw ValidationError("candidate pool size must be >= 1");
    if (k < 1) throw ValidationError("K must be >= 1");
    const auto scores = dc_scores(apply_knowledge(net, b.known));
    std::vector<NodeId> eligible = b.eligible();
    if (static_cast<int>(eligible.size()) < k) {
        throw ValidationError(fmt::format("only {} eligible nodes for K = {}", eligible.size(), k));
    }
    std::stable_sort(eligible.begin(), eligible.end(), [&](NodeId x, NodeId y) {
        return scores[static_cast<std::size_t>(x)] > scores[static_cast<std::size_t>(y)];
    });
    const int log_m = static_cast<int>(std::ceil(std::log2(static_cast<double>(pool_size)) - 1e-12));
    const auto top_n = std::min<std::size_t>(eligible.size(), static_cast<std::size_t>(std::max(k, log_m * k)));
    std::vector<double> top_scores(top_n);
    for (std::size_t i = 0; i < top_n; ++i) top_scores[i] = scores[static_cast<std::size_t>(eligible[i])];

    struct Scored {
        double sum;
        Action action;
    };
    std::vector<Scored> pool;
    for (const auto& idx : best_subsets(top_scores, k, static_cast<std::size_t>(pool_size))) {
        std::vector<NodeId> nodes;
        double sum = 0.0;
        for (int i : idx) {
            nodes.push_back(eligible[static_cast<std::size_t>(i)]);
            sum += top_scores[static_cast<std::size_t>(i)];
        }
        pool.push_back({sum, Action(std::move(nodes))});
    }
    std::stable_sort(pool.begin(), pool.end(), [](const Scored& x, const Scored& y) {
        if (x.sum != y.sum) return x.sum > y.sum;
        return x.action < y.action;
    });
    std::vector<Action> out;
    // The pure top-K action heads the list even when score ties reorder it.
    std::vector<NodeId> top_k(eligible.begin(), eligible.begin() + k);
    out.emplace_back(std::move(top_k));
    for (auto& s : pool) {
        if (out.size() >= static_cast<std::size_t>(pool_size)) break;
        if (s.action != out.front()) out.push_back(std::move(s.action));
    }
    return out;
}

InstanceVote best_action_for_instance(const UncertainNetwork& net, const InstantiatedNetwork& inst, const Belief& b,
                                      std::span<const Action> candidates, int sims, int horizon, int k, int steps,
                                      std::uint64_t seed, const Deadline& deadline) {
    if (candidates.empty()) throw ValidationError("no candidate actions");
    if (sims < 1) throw ValidationError("eta must be >= 1");
    if (b.particles.empty()) throw ValidationError("belief has no particles");
    const CascadeModel model(inst);
    std::uniform_int_distribution<std::size_t> pick(0, b.particles.size() - 1);

    std::vector<double> mean(candidates.size(), 0.0);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        deadline.check("PSINET instance evaluation");
        validate_action(net, candidates[c], k);
        double total = 0.0;
        for (int j = 0; j < sims; ++j) {
            Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
            const PomdpState& particle = b.particles[pick(rng)];
            total += random_rollout(model, particle.w, candidates[c], horizon, k, steps, rng);
        }
        mean[c] = total / sims;
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (mean[x] != mean[y]) return mean[x] > mean[y];
        return candidates[x] < candidates[y];
    });
    InstanceVote vote;
    for (std::size_t i : order) {
        vote.ranking.push_back(candidates[i]);
        vote.values.push_back(mean[i]);
    }
    vote.best_value = vote.values.front();
    return vote;
}

PsinetResult psinet_plan(const UncertainNetwork& net, const Belief& b, const PsinetConfig& cfg, Rng& rng,
                         const Deadline& deadline) {
    const VoteConfig& vc = cfg.vote;
    if (vc.n_instances < 1 || vc.sims_per_action < 1 || vc.candidate_pool < 1) {
        throw ValidationError("PSINET config: Delta, eta and M must all be >= 1");
    }
    if (cfg.round < 1 || cfg.round > cfg.rounds) throw ValidationError("PSINET config: round outside [1, T]");
    const int horizon = cfg.rounds - cfg.round + 1;

    PsinetResult result;
    result.candidates = candidate_actions(net, b, cfg.k, vc.candidate_pool);
    const std::uint64_t root = rng();
    for (int d = 0; d < vc.n_instances; ++d) {
        Rng inst_rng = make_rng(derive_seed(root, static_cast<std::uint64_t>(d)));
        InstantiatedNetwork inst = sample_instance(net, b.known, inst_rng);
        InstanceVote vote = best_action_for_instance(net, inst, b, result.candidates, vc.sims_per_action, horizon,
                                                     cfg.k, cfg.steps, inst_rng(), deadline);
        vote.instance_index = d;
        result.votes.push_back(std::move(vote));
        result.instances.emplace_back(inst.kept().begin(), inst.kept().end());
    }
    switch (vc.variant) {
        case VoteVariant::plurality:
            result.action = vote_plurality(result.votes);
            break;
        case VoteVariant::weighted:
            result.action = vote_weighted(result.votes, result.instances);
            break;
        case VoteVariant::copeland:
            result.action = vote_copeland(result.votes);
            break;
    }
    return result;
}

}  // namespace dime
