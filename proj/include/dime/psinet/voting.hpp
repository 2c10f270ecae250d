#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dime/pomdp/model.hpp"

namespace dime {

// One ensemble member's preference: candidates best first.
struct InstanceVote {
    int instance_index = 0;
    std::vector<Action> ranking;
    std::vector<double> values;  // mean rollout reward, parallel to ranking
    double best_value = 0.0;

    const Action& top() const { return ranking.front(); }
};

// Most first-place votes; ties go to the lexicographically smallest action.
Action vote_plurality(std::span<const InstanceVote> votes);

// Weight of an instance that removed `removed` of `n_uncertain` uncertain
// edges: C(n, m) / 2^n. Exact for n <= 53.
double binomial_vote_weight(int n_uncertain, int removed);

// First-place votes weighted by binomial_vote_weight of each instance's F
// vector (parallel to votes).
Action vote_weighted(std::span<const InstanceVote> votes, std::span<const std::vector<std::uint8_t>> instance_f);

// Copeland score per candidate: pairwise strict-majority wins minus losses.
// Returns the best score; ties lexicographic. Throws ValidationError if the
// rankings are not over one shared candidate set.
Action vote_copeland(std::span<const InstanceVote> votes);

}  // namespace dime
