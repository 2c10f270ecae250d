#include "dime/harness/episode.hpp"

#include <chrono>
#include <iostream>

#include <fmt/format.h>

#include "dime/core/error.hpp"

namespace dime {

EpisodeRecord run_episode(const UncertainNetwork& net, Planner& planner, int k, int rounds, int steps,
                          std::uint64_t seed, const EpisodeOptions& opts) {
    if (k < 1 || k > net.size()) throw ValidationError(fmt::format("K={} outside [1, {}]", k, net.size()));
    if (rounds < 0 || steps < 0) throw ValidationError("T and L must be non-negative");
    if (static_cast<long>(k) * rounds > net.size()) {
        std::cerr << fmt::format("warning: K*T = {} exceeds N = {}\n", k * rounds, net.size());
    }
    EpisodeRecord rec;
    rec.network = net.meta().name;
    rec.planner = planner.name();
    rec.k = k;
    rec.rounds = rounds;
    rec.steps = steps;
    rec.root_seed = seed;

    Rng truth_rng = make_rng(derive_seed(seed, 0));
    PomdpState truth{NodeMask(net.size()), std::vector<std::uint8_t>(net.uncertain_count())};
    auto unc = net.uncertain_edges();
    for (std::size_t e = 0; e < unc.size(); ++e) truth.f[e] = bernoulli(truth_rng, *unc[e].u) ? 1 : 0;
    rec.true_f = truth.f;

    Rng belief_rng = make_rng(derive_seed(seed, 3));
    Belief belief = initial_belief(net, opts.n_particles, belief_rng);

    for (int t = 1; t <= rounds; ++t) {
        PlanContext ctx{net, belief, k, rounds, steps, t, {}};
        if (opts.round_budget_s) ctx.deadline = Deadline::after(*opts.round_budget_s);
        Rng planner_rng = make_rng(derive_seed(seed, 2, static_cast<std::uint64_t>(t)));
        const auto start = std::chrono::steady_clock::now();
        PlanOutput out;
        try {
            out = planner.plan(ctx, planner_rng);
            if (opts.round_budget_s) ctx.deadline.check("round");
        } catch (const BudgetExceeded&) {
            rec.dnf = true;
            rec.dnf_round = t;
            break;
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

        const Action& a = out.action;
        validate_action(net, a, k);
        for (NodeId v : a.nodes()) {
            if (belief.chosen.test(v)) {
                throw ValidationError(
                    fmt::format("planner {} chose node {} again in round {}", planner.name(), v, t));
            }
        }

        Rng env_rng = make_rng(derive_seed(seed, 1, static_cast<std::uint64_t>(t)));
        GenerativeOutcome g = generative_step(net, truth, a, steps, env_rng);
        truth = std::move(g.next);
        belief = belief_update(net, belief, a, g.obs, steps, belief_rng);

        RoundRecord r;
        r.action = a;
        r.obs = std::move(g.obs);
        r.hidden_w = truth.w.nodes();
        r.reward = g.reward;
        r.wall_ms = ms;
        if (opts.keep_details) r.details = std::move(out.details);
        rec.history.push_back(std::move(r));
    }
    rec.final_spread = truth.w.count();
    return rec;
}

namespace {

nlohmann::json obs_json(const Observation& o) {
    nlohmann::json j = nlohmann::json::array();
    for (const ObservedEdge& e : o.entries) j.push_back({{"edge", e.edge}, {"present", e.bit != 0}});
    return j;
}

}  // namespace

nlohmann::json to_json(const EpisodeRecord& rec) {
    nlohmann::json rounds = nlohmann::json::array();
    int t = 0;
    for (const RoundRecord& r : rec.history) {
        nlohmann::json jr{{"round", ++t},
                          {"action", r.action.nodes()},
                          {"observation", obs_json(r.obs)},
                          {"hidden_w", r.hidden_w},
                          {"reward", r.reward},
                          {"wall_ms", r.wall_ms}};
        if (!r.details.empty()) jr["details"] = r.details;
        rounds.push_back(std::move(jr));
    }
    nlohmann::json j{{"network", rec.network},
                     {"planner", rec.planner},
                     {"K", rec.k},
                     {"T", rec.rounds},
                     {"L", rec.steps},
                     {"root_seed", rec.root_seed},
                     {"true_f", rec.true_f},
                     {"rounds", std::move(rounds)},
                     {"final_spread", rec.final_spread},
                     {"dnf", rec.dnf},
                     {"ground_truth_isolated", rec.ground_truth_isolated}};
    if (rec.dnf_round) j["dnf_round"] = *rec.dnf_round;
    return j;
}

EpisodeRecord episode_from_json(const nlohmann::json& j) {
    try {
        EpisodeRecord rec;
        rec.network = j.at("network").get<std::string>();
        rec.planner = j.at("planner").get<std::string>();
        rec.k = j.at("K").get<int>();
        rec.rounds = j.at("T").get<int>();
        rec.steps = j.at("L").get<int>();
        rec.root_seed = j.at("root_seed").get<std::uint64_t>();
        rec.true_f = j.at("true_f").get<std::vector<std::uint8_t>>();
        for (const auto& jr : j.at("rounds")) {
            RoundRecord r;
            r.action = Action(jr.at("action").get<std::vector<NodeId>>());
            for (const auto& e : jr.at("observation")) {
                r.obs.entries.push_back({e.at("edge").get<EdgeId>(), static_cast<std::uint8_t>(e.at("present").get<bool>())});
            }
            r.hidden_w = jr.at("hidden_w").get<std::vector<NodeId>>();
            r.reward = jr.value("reward", 0);
            r.wall_ms = jr.value("wall_ms", 0.0);
            if (jr.contains("details")) r.details = jr.at("details");
            rec.history.push_back(std::move(r));
        }
        rec.final_spread = j.at("final_spread").get<int>();
        rec.dnf = j.value("dnf", false);
        if (j.contains("dnf_round")) rec.dnf_round = j.at("dnf_round").get<int>();
        rec.ground_truth_isolated = j.value("ground_truth_isolated", true);
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("episode record: {}", e.what()));
    }
}

}  // namespace dime
