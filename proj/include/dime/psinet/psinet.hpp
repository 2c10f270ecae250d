#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dime/core/random.hpp"
#include "dime/pomdp/model.hpp"
#include "dime/psinet/voting.hpp"

namespace dime {

enum class VoteVariant { plurality, weighted, copeland };  // PSINET-S, -W, -C

VoteVariant parse_vote_variant(std::string_view s);  // "s" | "w" | "c"
char vote_variant_letter(VoteVariant v);

struct VoteConfig {
    VoteVariant variant = VoteVariant::weighted;
    int n_instances = 64;         // Delta
    int sims_per_action = 256;    // eta
    int candidate_pool = 50;      // M
};

struct PsinetConfig {
    VoteConfig vote;
    int k = 1;
    int rounds = 1;   // T
    int steps = 1;    // L
    int round = 1;    // current round, 1-based; rollout horizon is rounds - round + 1
};

// Candidate pool: K-subsets of the top max(K, ceil(log2 M) * K) eligible
// nodes by degree centrality (observations applied), the M subsets with the
// largest score sums (ties: lexicographic). The first entry is always the
// plain top-K action. Throws ValidationError with fewer than K eligible nodes.
std::vector<Action> candidate_actions(const UncertainNetwork& net, const Belief& b, int k, int pool_size);

// Ranks candidates on one instance by the mean of `sims` random rollouts
// started from belief particles (their F replaced by the instance). All
// candidates see the same particle and random stream per simulation index.
InstanceVote best_action_for_instance(const UncertainNetwork& net, const InstantiatedNetwork& inst, const Belief& b,
                                      std::span<const Action> candidates, int sims, int horizon, int k, int steps,
                                      std::uint64_t seed, const Deadline& deadline = {});

struct PsinetResult {
    Action action;
    std::vector<Action> candidates;
    std::vector<InstanceVote> votes;
    std::vector<std::vector<std::uint8_t>> instances;  // F per vote
};

// Samples Delta instances consistent with the belief's observed edges, votes
// with each, aggregates with the configured rule.
PsinetResult psinet_plan(const UncertainNetwork& net, const Belief& b, const PsinetConfig& cfg, Rng& rng,
                         const Deadline& deadline = {});

}  // namespace dime
