#include "dime/psinet/voting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "dime/core/error.hpp"

namespace dime {
namespace {

void require_votes(std::span<const InstanceVote> votes) {
    if (votes.empty()) throw ValidationError("voting needs at least one vote");
    for (const auto& v : votes) {
        if (v.ranking.empty()) throw ValidationError("vote with an empty ranking");
    }
}

// Highest score wins; std::map iteration gives lexicographic order, so the
// first maximum is the tie-break winner.
template <typename Score>
Action argmax(const std::map<Action, Score>& scores) {
    auto best = scores.begin();
    for (auto it = scores.begin(); it != scores.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    return best->first;
}

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

double log_binomial_weight(int n, int m) {
    return std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0) - n * std::log(2.0);
}

}  // namespace

Action vote_plurality(std::span<const InstanceVote> votes) {
    require_votes(votes);
    std::map<Action, int> tally;
    for (const auto& v : votes) ++tally[v.top()];
    return argmax(tally);
}

double binomial_vote_weight(int n, int m) {
    if (n < 0 || m < 0 || m > n) throw ValidationError(fmt::format("binomial weight: invalid n={} m={}", n, m));
    if (n <= 62) {
        const int k = std::min(m, n - m);
        unsigned __int128 c = 1;
        for (int i = 1; i <= k; ++i) c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        return std::ldexp(static_cast<double>(static_cast<std::uint64_t>(c)), -n);
    }
    return std::exp(log_binomial_weight(n, m));
}

Action vote_weighted(std::span<const InstanceVote> votes, std::span<const std::vector<std::uint8_t>> instance_f) {
    require_votes(votes);
    if (votes.size() != instance_f.size()) throw ValidationError("vote_weighted: one F vector per vote required");
    // Accumulate in log space: for large |E_u| the weights underflow.
    std::map<Action, double> log_tally;
    for (std::size_t i = 0; i < votes.size(); ++i) {
        const int n = static_cast<int>(instance_f[i].size());
        const int removed = static_cast<int>(std::count(instance_f[i].begin(), instance_f[i].end(), 0));
        const double lw = n <= 62 ? std::log(binomial_vote_weight(n, removed)) : log_binomial_weight(n, removed);
        auto [it, fresh] = log_tally.try_emplace(votes[i].top(), lw);
        if (!fresh) it->second = log_add(it->second, lw);
    }
    return argmax(log_tally);
}

Action vote_copeland(std::span<const InstanceVote> votes) {
    require_votes(votes);
    std::vector<Action> cands = votes.front().ranking;
    std::sort(cands.begin(), cands.end());
    if (std::adjacent_find(cands.begin(), cands.end()) != cands.end()) throw ValidationError("ranking repeats a candidate");
    const std::size_t c = cands.size();
    // position[v][i]: rank of candidate i (sorted order) in vote v
    std::vector<std::vector<std::size_t>> position(votes.size(), std::vector<std::size_t>(c));
    for (std::size_t v = 0; v < votes.size(); ++v) {
        std::vector<Action> sorted = votes[v].ranking;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != cands) throw ValidationError("Copeland voting requires identical candidate sets");
        for (std::size_t r = 0; r < c; ++r) {
            const auto i = static_cast<std::size_t>(std::lower_bound(cands.begin(), cands.end(), votes[v].ranking[r]) - cands.begin());
            position[v][i] = r;
        }
    }
    std::map<Action, int> score;
    for (const auto& a : cands) score[a] = 0;
    const std::size_t voters = votes.size();
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = i + 1; j < c; ++j) {
            std::size_t prefer_i = 0;
            for (std::size_t v = 0; v < voters; ++v) prefer_i += position[v][i] < position[v][j] ? 1 : 0;
            const std::size_t prefer_j = voters - prefer_i;
            if (2 * prefer_i > voters) {
                ++score[cands[i]];
                --score[cands[j]];
            } else if (2 * prefer_j > voters) {
                ++score[cands[j]];
                --score[cands[i]];
            }
        }
    }
    return argmax(score);
}

}  // namespace dime
