#include "dime/harness/planners.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "dime/core/error.hpp"

namespace dime {
namespace {

class DcPlanner final : public Planner {
public:
    std::string name() const override { return "dc"; }
    PlanOutput plan(const PlanContext& ctx, Rng&) override { return {dc_plan(ctx.net, ctx.belief, ctx.k), {}}; }
};

class RandomPlanner final : public Planner {
public:
    std::string name() const override { return "random"; }
    PlanOutput plan(const PlanContext& ctx, Rng& rng) override { return {random_plan(ctx.belief, ctx.k, rng), {}}; }
};

class GreedyPlanner final : public Planner {
public:
    explicit GreedyPlanner(PlannerSpec spec) : spec_(std::move(spec)) {}
    std::string name() const override { return spec_.label(); }
    PlanOutput plan(const PlanContext& ctx, Rng& rng) override {
        GreedyResult r = adaptive_greedy_plan(ctx.net, ctx.belief, ctx.k, ctx.steps, spec_.greedy_sims, rng,
                                              ctx.deadline);
        PlanOutput out{r.action, nlohmann::json::object()};
        out.details["gains"] = r.gains;
        return out;
    }

private:
    PlannerSpec spec_;
};

class PsinetPlanner final : public Planner {
public:
    explicit PsinetPlanner(PlannerSpec spec) : spec_(std::move(spec)) {}
    std::string name() const override { return spec_.label(); }
    PlanOutput plan(const PlanContext& ctx, Rng& rng) override {
        PsinetConfig cfg;
        cfg.vote = {spec_.variant, spec_.n_instances, spec_.sims_per_action, spec_.candidate_pool};
        cfg.k = ctx.k;
        cfg.rounds = ctx.rounds;
        cfg.steps = ctx.steps;
        cfg.round = ctx.round;
        PsinetResult r = psinet_plan(ctx.net, ctx.belief, cfg, rng, ctx.deadline);
        PlanOutput out{r.action, nlohmann::json::object()};
        // Mean value per candidate across the ensemble.
        nlohmann::json scores = nlohmann::json::array();
        for (const Action& c : r.candidates) {
            double total = 0.0;
            int first = 0;
            for (const InstanceVote& v : r.votes) {
                auto it = std::find(v.ranking.begin(), v.ranking.end(), c);
                total += v.values[static_cast<std::size_t>(it - v.ranking.begin())];
                if (v.top() == c) ++first;
            }
            scores.push_back({{"action", c.nodes()}, {"mean_value", total / static_cast<double>(r.votes.size())},
                              {"first_place_votes", first}});
        }
        out.details["candidates"] = std::move(scores);
        return out;
    }

private:
    PlannerSpec spec_;
};

class HealPlanner final : public Planner {
public:
    HealPlanner(PlannerSpec spec, bool t_variant) : spec_(std::move(spec)), t_variant_(t_variant) {}
    std::string name() const override { return spec_.label(); }
    PlanOutput plan(const PlanContext& ctx, Rng& rng) override {
        HealConfig cfg;
        cfg.tasp.n_instances = spec_.n_instances;
        cfg.tasp.rollout_reps = spec_.rollout_reps;
        cfg.partition_seed = spec_.partition_seed;
        HealResult r = t_variant_ ? heal_t_plan(ctx.net, ctx.belief, ctx.k, ctx.rounds, ctx.steps, ctx.round, cfg,
                                                rng, ctx.deadline)
                                  : heal_plan(ctx.net, ctx.belief, ctx.k, ctx.rounds, ctx.steps, ctx.round, cfg, rng,
                                              ctx.deadline);
        PlanOutput out{r.action, nlohmann::json::object()};
        out.details["cut_weight"] = r.cut_weight;
        nlohmann::json parts = nlohmann::json::array();
        for (const PartDiagnostics& d : r.parts) {
            nlohmann::json scores = nlohmann::json::array();
            for (const auto& [v, value] : d.expected) scores.push_back({{"node", v}, {"expected", value}});
            parts.push_back({{"part", d.part_index},
                             {"size", d.size},
                             {"budget", d.budget},
                             {"picked", d.picked},
                             {"scores", std::move(scores)}});
        }
        out.details["parts"] = std::move(parts);
        return out;
    }

private:
    PlannerSpec spec_;
    bool t_variant_;
};

}  // namespace

std::string PlannerSpec::label() const {
    if (kind == "psinet") return fmt::format("psinet-{}", vote_variant_letter(variant));
    if (kind == "heal_t") return "heal-t";
    return kind;
}

PlannerSpec planner_spec_from_name(const std::string& name) {
    PlannerSpec spec;
    if (name == "dc" || name == "random" || name == "greedy" || name == "heal") {
        spec.kind = name;
    } else if (name == "heal-t" || name == "heal_t") {
        spec.kind = "heal_t";
    } else if (name.rfind("psinet-", 0) == 0 && name.size() == 8) {
        spec.kind = "psinet";
        spec.variant = parse_vote_variant(name.substr(7));
    } else if (name == "psinet") {
        spec.kind = "psinet";
    } else {
        throw ValidationError(fmt::format("unknown planner '{}'", name));
    }
    return spec;
}

PlannerSpec parse_planner_spec(const nlohmann::json& j) {
    if (j.is_string()) return planner_spec_from_name(j.get<std::string>());
    if (!j.is_object() || !j.contains("kind")) throw ValidationError("planner entry needs a \"kind\"");
    PlannerSpec spec = planner_spec_from_name(j.at("kind").get<std::string>());
    if (j.contains("variant")) spec.variant = parse_vote_variant(j.at("variant").get<std::string>());
    spec.n_instances = j.value("delta", spec.n_instances);
    spec.sims_per_action = j.value("eta", spec.sims_per_action);
    spec.candidate_pool = j.value("M", spec.candidate_pool);
    spec.rollout_reps = j.value("rollout_reps", spec.rollout_reps);
    spec.greedy_sims = j.value("greedy_sims", spec.greedy_sims);
    spec.partition_seed = j.value("partition_seed", spec.partition_seed);
    if (spec.n_instances < 1 || spec.sims_per_action < 1 || spec.candidate_pool < 1 || spec.rollout_reps < 1 ||
        spec.greedy_sims < 1) {
        throw ValidationError(fmt::format("planner {}: counts must be >= 1", spec.label()));
    }
    return spec;
}

nlohmann::json to_json(const PlannerSpec& spec) {
    return {{"kind", spec.kind},
            {"variant", std::string(1, vote_variant_letter(spec.variant))},
            {"delta", spec.n_instances},
            {"eta", spec.sims_per_action},
            {"M", spec.candidate_pool},
            {"rollout_reps", spec.rollout_reps},
            {"greedy_sims", spec.greedy_sims},
            {"partition_seed", spec.partition_seed}};
}

std::unique_ptr<Planner> make_planner(const PlannerSpec& spec) {
    if (spec.kind == "dc") return std::make_unique<DcPlanner>();
    if (spec.kind == "random") return std::make_unique<RandomPlanner>();
    if (spec.kind == "greedy") return std::make_unique<GreedyPlanner>(spec);
    if (spec.kind == "psinet") return std::make_unique<PsinetPlanner>(spec);
    if (spec.kind == "heal") return std::make_unique<HealPlanner>(spec, false);
    if (spec.kind == "heal_t") return std::make_unique<HealPlanner>(spec, true);
    throw ValidationError(fmt::format("unknown planner kind '{}'", spec.kind));
}

Action dc_plan(const UncertainNetwork& net, const Belief& b, int k) {
    std::vector<NodeId> eligible = b.eligible();
    if (k < 1 || static_cast<int>(eligible.size()) < k) {
        throw ValidationError(fmt::format("DC: need {} eligible nodes, have {}", k, eligible.size()));
    }
    const auto dc = dc_scores(apply_knowledge(net, b.known));
    std::stable_sort(eligible.begin(), eligible.end(), [&](NodeId x, NodeId y) {
        return dc[static_cast<std::size_t>(x)] > dc[static_cast<std::size_t>(y)];
    });
    eligible.resize(static_cast<std::size_t>(k));
    return Action(std::move(eligible));
}

Action random_plan(const Belief& b, int k, Rng& rng) {
    std::vector<NodeId> eligible = b.eligible();
    if (k < 1 || static_cast<int>(eligible.size()) < k) {
        throw ValidationError(fmt::format("random: need {} eligible nodes, have {}", k, eligible.size()));
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
        std::uniform_int_distribution<std::size_t> d(i, eligible.size() - 1);
        std::swap(eligible[i], eligible[d(rng)]);
    }
    eligible.resize(static_cast<std::size_t>(k));
    return Action(std::move(eligible));
}

GreedyResult adaptive_greedy_plan(const UncertainNetwork& net, const Belief& b, int k, int steps, int n_sims,
                                  Rng& rng, const Deadline& deadline) {
    if (n_sims < 1) throw ValidationError("greedy: n_sims must be >= 1");
    if (b.particles.empty()) throw ValidationError("belief has no particles");
    std::vector<NodeId> pool = b.eligible();
    if (k < 1 || static_cast<int>(pool.size()) < k) {
        throw ValidationError(fmt::format("greedy: need {} eligible nodes, have {}", k, pool.size()));
    }
    struct Sim {
        const PomdpState* particle;
        CascadeModel model;
        std::uint64_t stream;
    };
    std::vector<Sim> sims;
    sims.reserve(static_cast<std::size_t>(n_sims));
    std::uniform_int_distribution<std::size_t> pick(0, b.particles.size() - 1);
    for (int j = 0; j < n_sims; ++j) {
        const PomdpState& s = b.particles[pick(rng)];
        sims.push_back({&s, CascadeModel(net, s.f), rng()});
    }
    auto spread_with = [&](const Sim& sim, const std::vector<NodeId>& seeds) {
        NodeMask w = sim.particle->w;
        for (NodeId v : seeds) w.set(v);
        sim.model.run(w, steps, sim.stream);
        return w.count();
    };

    GreedyResult result;
    std::vector<NodeId> chosen;
    for (int i = 0; i < k; ++i) {
        double base = 0.0;
        for (const Sim& sim : sims) base += spread_with(sim, chosen);
        NodeId best = -1;
        double best_gain = 0.0;
        for (NodeId v : pool) {
            deadline.check("greedy");
            auto trial = chosen;
            trial.push_back(v);
            double total = 0.0;
            for (const Sim& sim : sims) total += spread_with(sim, trial);
            const double gain = (total - base) / n_sims;
            if (best < 0 || gain > best_gain) {
                best = v;
                best_gain = gain;
            }
        }
        chosen.push_back(best);
        pool.erase(std::find(pool.begin(), pool.end(), best));
        result.gains.push_back(best_gain);
    }
    result.action = Action(std::move(chosen));
    return result;
}

}  // namespace dime
