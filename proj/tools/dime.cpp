#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <httplib.h>

#include "dime/diffusion/cascade.hpp"
#include "dime/harness/episode.hpp"
#include "dime/harness/exact.hpp"
#include "dime/harness/experiment.hpp"
#include "dime/kernels/cascade_kernels.hpp"
#include "dime/netcore/generators.hpp"
#include "dime/netcore/network_io.hpp"
#include "dime/netcore/partition.hpp"
#include "dime/service/server.hpp"

namespace fs = std::filesystem;
using namespace dime;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError(fmt::format("cannot open {}", p.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot write {}", path));
    out << text;
}

// Belief from a history file: {"rounds": [{"action": [...], "observation":
// [{"edge": id, "present": bool}], "attended": [...]}]} (episode records and
// service exports both fit).
Belief belief_from_history(const UncertainNetwork& net, const std::string& path, int steps, int particles,
                           std::uint64_t seed, int& rounds_done) {
    Rng rng = make_rng(derive_seed(seed, 5));
    Belief b = initial_belief(net, particles, rng);
    rounds_done = 0;
    if (path.empty()) return b;
    const auto j = nlohmann::json::parse(slurp(path));
    for (const auto& r : j.at("rounds")) {
        Action a(r.at("action").get<std::vector<NodeId>>());
        Observation o;
        for (const auto& e : r.at("observation")) {
            o.entries.push_back({e.at("edge").get<EdgeId>(), static_cast<std::uint8_t>(e.at("present").get<bool>())});
        }
        std::optional<std::vector<NodeId>> attended;
        if (r.contains("attended")) attended = r.at("attended").get<std::vector<NodeId>>();
        Rng step = make_rng(derive_seed(seed, 7, static_cast<std::uint64_t>(++rounds_done)));
        b = belief_update(net, b, a, o, steps, step, attended);
    }
    return b;
}

struct PlanArgs {
    std::string net, history, csv;
    int k = 1, rounds = 1, steps = 1, round = 0, particles = kDefaultParticles;
    std::uint64_t seed = 1;
    int delta = 64;
};

void add_plan_args(CLI::App* cmd, PlanArgs& a) {
    cmd->add_option("--net", a.net, "network JSON file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--history", a.history, "rounds so far (episode record or session export)");
    cmd->add_option("--K", a.k, "nodes per round");
    cmd->add_option("--T", a.rounds, "rounds");
    cmd->add_option("--L", a.steps, "cascade steps between rounds");
    cmd->add_option("--round", a.round, "current round (default: after the history)");
    cmd->add_option("--particles", a.particles);
    cmd->add_option("--seed", a.seed);
    cmd->add_option("--delta", a.delta, "sampled network instances");
    cmd->add_option("--csv", a.csv, "per-instance / per-part diagnostics CSV");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential influence maximisation on uncertain networks"};
    app.require_subcommand(1);
    std::string kernel;
    app.add_option("--kernel", kernel, "force the cascade kernel (scalar|avx2)");

    // net
    auto* net_cmd = app.add_subcommand("net", "generate, inspect and partition networks");
    net_cmd->require_subcommand(1);

    struct GenArgs {
        std::string generator = "community", out, name;
        int n = 30, blocks = 2, ring_k = 4;
        double p_in = 0.1, p_out = 0.01, rewire = 0.1, frac = 0.5;
        std::vector<double> p{0.1, 0.1}, u{0.5, 0.5};
        std::uint64_t seed = 1;
    } gen;
    auto* gen_cmd = net_cmd->add_subcommand("gen", "generate a synthetic uncertain network");
    gen_cmd->add_option("--generator", gen.generator)->check(CLI::IsMember({"community", "er", "ws"}));
    gen_cmd->add_option("--n", gen.n);
    gen_cmd->add_option("--blocks", gen.blocks);
    gen_cmd->add_option("--p-in,--edge-p", gen.p_in);
    gen_cmd->add_option("--p-out", gen.p_out);
    gen_cmd->add_option("--ring-k", gen.ring_k);
    gen_cmd->add_option("--rewire", gen.rewire);
    gen_cmd->add_option("--uncertain-frac", gen.frac);
    gen_cmd->add_option("--p", gen.p, "propagation probability range lo hi")->expected(2);
    gen_cmd->add_option("--u", gen.u, "existence probability range lo hi")->expected(2);
    gen_cmd->add_option("--seed", gen.seed);
    gen_cmd->add_option("--name", gen.name);
    gen_cmd->add_option("-o,--out", gen.out);

    std::string stats_net;
    auto* stats_cmd = net_cmd->add_subcommand("stats", "summary of a network file");
    stats_cmd->add_option("--net", stats_net)->required()->check(CLI::ExistingFile);

    std::string part_net, part_out;
    int part_k = 2;
    double part_tol = 0.05;
    std::uint64_t part_seed = 0;
    auto* part_cmd = net_cmd->add_subcommand("partition", "balanced k-way partition");
    part_cmd->add_option("--net", part_net)->required()->check(CLI::ExistingFile);
    part_cmd->add_option("--k", part_k);
    part_cmd->add_option("--tol", part_tol);
    part_cmd->add_option("--seed", part_seed);
    part_cmd->add_option("-o,--out", part_out, "node,part CSV");

    // diffuse
    std::string dif_net;
    std::vector<NodeId> dif_seeds;
    int dif_steps = 1, dif_sims = 10000;
    std::uint64_t dif_seed = 1;
    auto* dif_cmd = app.add_subcommand("diffuse", "Monte Carlo spread of a seed set");
    dif_cmd->add_option("--net", dif_net)->required()->check(CLI::ExistingFile);
    dif_cmd->add_option("--seeds", dif_seeds)->required()->delimiter(',');
    dif_cmd->add_option("--L", dif_steps);
    dif_cmd->add_option("--sims", dif_sims);
    dif_cmd->add_option("--seed", dif_seed);

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "one round of a planner");
    plan_cmd->require_subcommand(1);
    PlanArgs ps_args;
    std::string ps_variant = "w";
    int ps_eta = 256, ps_m = 50;
    auto* ps_cmd = plan_cmd->add_subcommand("psinet", "PSINET ensemble vote");
    add_plan_args(ps_cmd, ps_args);
    ps_cmd->add_option("--variant", ps_variant)->check(CLI::IsMember({"s", "w", "c"}));
    ps_cmd->add_option("--eta", ps_eta, "rollouts per candidate and instance");
    ps_cmd->add_option("--M", ps_m, "candidate pool size");
    PlanArgs heal_args;
    std::string heal_variant = "k";
    int heal_reps = 8;
    auto* heal_cmd = plan_cmd->add_subcommand("heal", "HEAL partition planner");
    add_plan_args(heal_cmd, heal_args);
    heal_cmd->add_option("--variant", heal_variant)->check(CLI::IsMember({"k", "t"}));
    heal_cmd->add_option("--rollout-reps", heal_reps);

    // run
    std::string run_config, run_out = "results.csv", run_timings, run_histories;
    auto* run_cmd = app.add_subcommand("run", "run an experiment config");
    run_cmd->add_option("--config", run_config)->required()->check(CLI::ExistingFile);
    run_cmd->add_option("-o,--out", run_out, "results CSV");
    run_cmd->add_option("--timings", run_timings, "per-round planner time CSV");
    run_cmd->add_option("--histories", run_histories, "directory for per-episode records");

    // episode
    std::string ep_planner = "heal", ep_net, ep_out;
    int ep_k = 1, ep_t = 1, ep_l = 1, ep_particles = kDefaultParticles;
    std::uint64_t ep_seed = 1;
    double ep_budget = 0;
    nlohmann::json ep_knobs = nlohmann::json::object();
    int ep_delta = 0, ep_eta = 0, ep_m = 0, ep_reps = 0;
    auto* ep_cmd = app.add_subcommand("episode", "play one episode against sampled ground truth");
    ep_cmd->add_option("--planner", ep_planner, "dc|random|greedy|psinet-s|psinet-w|psinet-c|heal|heal-t");
    ep_cmd->add_option("--net", ep_net)->required()->check(CLI::ExistingFile);
    ep_cmd->add_option("--K", ep_k);
    ep_cmd->add_option("--T", ep_t);
    ep_cmd->add_option("--L", ep_l);
    ep_cmd->add_option("--seed", ep_seed);
    ep_cmd->add_option("--particles", ep_particles);
    ep_cmd->add_option("--budget", ep_budget, "per-round planner time limit in seconds");
    ep_cmd->add_option("--delta", ep_delta);
    ep_cmd->add_option("--eta", ep_eta);
    ep_cmd->add_option("--M", ep_m);
    ep_cmd->add_option("--rollout-reps", ep_reps);
    ep_cmd->add_option("-o,--out", ep_out, "episode record JSON");

    // counterexample
    long ce_budget = kDefaultSearchBudget;
    std::uint64_t ce_seed = 1;
    std::string ce_out;
    auto* ce_cmd = app.add_subcommand("counterexample", "search for an adaptive-submodularity violation");
    ce_cmd->add_option("--budget", ce_budget, "networks to try");
    ce_cmd->add_option("--seed", ce_seed);
    ce_cmd->add_option("-o,--out", ce_out);

    // serve
    std::string sv_host = "127.0.0.1", sv_data, sv_planner = "heal", sv_static;
    int sv_port = 8080;
    auto* sv_cmd = app.add_subcommand("serve", "session HTTP service");
    sv_cmd->add_option("--host", sv_host)->envname("DIME_HOST");
    sv_cmd->add_option("--port", sv_port)->envname("DIME_PORT");
    sv_cmd->add_option("--data-dir", sv_data, "session logs (in-memory when empty)")->envname("DIME_DATA_DIR");
    sv_cmd->add_option("--planner", sv_planner, "default planner")->envname("DIME_PLANNER");
    sv_cmd->add_option("--static", sv_static, "directory of console assets to serve at /");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!kernel.empty()) {
            if (kernel == "scalar") {
                kernels::force(kernels::Level::scalar);
            } else if (kernel == "avx2") {
                kernels::force(kernels::Level::avx2);
            } else {
                throw ValidationError("--kernel must be scalar or avx2");
            }
        }

        if (*gen_cmd) {
            UncertaintyParams unc{gen.frac, {gen.p[0], gen.p[1]}, {gen.u[0], gen.u[1]}};
            UncertainNetwork net;
            if (gen.generator == "community") {
                net = generate_community(gen.n, gen.blocks, gen.p_in, gen.p_out, unc, gen.seed);
            } else if (gen.generator == "er") {
                net = generate_er(gen.n, gen.p_in, unc, gen.seed);
            } else {
                net = generate_ws(gen.n, gen.ring_k, gen.rewire, unc, gen.seed);
            }
            if (!gen.name.empty()) {
                NetworkMeta meta = net.meta();
                meta.name = gen.name;
                net = UncertainNetwork(net.size(), {net.certain_edges().begin(), net.certain_edges().end()},
                                       {net.uncertain_edges().begin(), net.uncertain_edges().end()}, meta);
            }
            write_text(gen.out, serialize_network(net) + "\n");
        } else if (*stats_cmd) {
            const auto net = load_network(stats_net);
            const auto dc = dc_scores(net);
            double max_dc = 0, sum_dc = 0;
            for (double d : dc) {
                max_dc = std::max(max_dc, d);
                sum_dc += d;
            }
            fmt::print("name        {}\nnodes       {}\ncertain     {}\nuncertain   {}\nmean dc     {:.3f}\nmax dc      {:.3f}\n",
                       net.meta().name, net.size(), net.certain_edges().size(), net.uncertain_count(),
                       sum_dc / net.size(), max_dc);
        } else if (*part_cmd) {
            const auto net = load_network(part_net);
            const auto parts = partition(net, part_k, part_tol, part_seed);
            fmt::print(stderr, "sizes [{}], cut weight {:.4f} of {:.4f}\n", fmt::join(parts.sizes(), ","),
                       cut_weight(net, parts), total_edge_weight(net));
            std::string csv = "node,part\n";
            for (NodeId v = 0; v < net.size(); ++v) csv += fmt::format("{},{}\n", v, parts.part[static_cast<std::size_t>(v)]);
            write_text(part_out, csv);
        } else if (*dif_cmd) {
            const auto net = load_network(dif_net);
            Rng rng = make_rng(dif_seed);
            const auto est = estimate_spread(net, dif_seeds, dif_steps, dif_sims, rng);
            fmt::print("spread {:.4f} +- {:.4f} ({} sims, kernel {})\n", est.mean, est.std_error, est.n_sims,
                       kernels::name(kernels::active().level));
        } else if (*ps_cmd) {
            const auto net = load_network(ps_args.net);
            int done = 0;
            Belief b = belief_from_history(net, ps_args.history, ps_args.steps, ps_args.particles, ps_args.seed, done);
            PsinetConfig cfg;
            cfg.vote = {parse_vote_variant(ps_variant), ps_args.delta, ps_eta, ps_m};
            cfg.k = ps_args.k;
            cfg.rounds = ps_args.rounds;
            cfg.steps = ps_args.steps;
            cfg.round = ps_args.round > 0 ? ps_args.round : done + 1;
            Rng rng = make_rng(derive_seed(ps_args.seed, 11, static_cast<std::uint64_t>(cfg.round)));
            const auto r = psinet_plan(net, b, cfg, rng);
            fmt::print("action {}\n", r.action.str());
            if (!ps_args.csv.empty()) {
                std::string csv = "instance,removed_edges,rank,action,value\n";
                for (std::size_t i = 0; i < r.votes.size(); ++i) {
                    const auto& f = r.instances[i];
                    const auto removed = std::count(f.begin(), f.end(), 0);
                    for (std::size_t j = 0; j < r.votes[i].ranking.size(); ++j) {
                        csv += fmt::format("{},{},{},\"{}\",{:.4f}\n", i, removed, j + 1, r.votes[i].ranking[j].str(),
                                           r.votes[i].values[j]);
                    }
                }
                write_text(ps_args.csv, csv);
            }
        } else if (*heal_cmd) {
            const auto net = load_network(heal_args.net);
            int done = 0;
            Belief b =
                belief_from_history(net, heal_args.history, heal_args.steps, heal_args.particles, heal_args.seed, done);
            HealConfig cfg;
            cfg.tasp.n_instances = heal_args.delta;
            cfg.tasp.rollout_reps = heal_reps;
            const int round = heal_args.round > 0 ? heal_args.round : done + 1;
            Rng rng = make_rng(derive_seed(heal_args.seed, 11, static_cast<std::uint64_t>(round)));
            const auto r = heal_variant == "t"
                               ? heal_t_plan(net, b, heal_args.k, heal_args.rounds, heal_args.steps, round, cfg, rng)
                               : heal_plan(net, b, heal_args.k, heal_args.rounds, heal_args.steps, round, cfg, rng);
            fmt::print("action {}\ncut weight {:.4f}\n", r.action.str(), r.cut_weight);
            for (const auto& d : r.parts) {
                fmt::print("part {}: size {}, budget {}, picked [{}]\n", d.part_index, d.size, d.budget,
                           fmt::join(d.picked, ","));
            }
            if (!heal_args.csv.empty()) {
                std::string csv = "part,size,budget,node,expected\n";
                for (const auto& d : r.parts) {
                    for (const auto& [v, value] : d.expected) {
                        csv += fmt::format("{},{},{},{},{:.4f}\n", d.part_index, d.size, d.budget, v, value);
                    }
                }
                write_text(heal_args.csv, csv);
            }
        } else if (*run_cmd) {
            const auto cfg = load_experiment_config(run_config);
            if (!run_histories.empty()) fs::create_directories(run_histories);
            const auto report = run_experiment(cfg, [&](const CellReport& cell, const EpisodeRecord& ep) {
                fmt::print(stderr, "{} {} K={} episode {}: spread {}{}\n", cell.planner, cell.network, cell.k,
                           cell.episodes.size() - 1, ep.final_spread, ep.dnf ? " (DNF)" : "");
                if (!run_histories.empty()) {
                    const auto name = fmt::format("{}_{}_K{}_{}.json", cell.planner, cell.network, cell.k,
                                                  cell.episodes.size() - 1);
                    write_text((fs::path(run_histories) / name).string(), to_json(ep).dump(1) + "\n");
                }
            });
            std::ostringstream csv;
            write_results_csv(report, csv);
            write_text(run_out, csv.str());
            if (!run_timings.empty()) {
                std::ostringstream t;
                write_timings_csv(report, t);
                write_text(run_timings, t.str());
            }
            std::cout << format_summary(report);
        } else if (*ep_cmd) {
            const auto net = load_network(ep_net);
            PlannerSpec spec = planner_spec_from_name(ep_planner);
            if (ep_delta > 0) spec.n_instances = ep_delta;
            if (ep_eta > 0) spec.sims_per_action = ep_eta;
            if (ep_m > 0) spec.candidate_pool = ep_m;
            if (ep_reps > 0) spec.rollout_reps = ep_reps;
            auto planner = make_planner(spec);
            EpisodeOptions opts;
            opts.n_particles = ep_particles;
            opts.keep_details = true;
            if (ep_budget > 0) opts.round_budget_s = ep_budget;
            const auto rec = run_episode(net, *planner, ep_k, ep_t, ep_l, ep_seed, opts);
            for (std::size_t t = 0; t < rec.history.size(); ++t) {
                const auto& r = rec.history[t];
                fmt::print("round {}: {} -> {} influenced ({:.1f} ms)\n", t + 1, r.action.str(), r.hidden_w.size(),
                           r.wall_ms);
            }
            if (rec.dnf) fmt::print("DNF in round {}\n", *rec.dnf_round);
            fmt::print("final spread {}\n", rec.final_spread);
            if (!ep_out.empty()) write_text(ep_out, to_json(rec).dump(1) + "\n");
        } else if (*ce_cmd) {
            Rng rng = make_rng(ce_seed);
            const auto w = find_adasub_counterexample(ce_budget, rng);
            if (!w) {
                fmt::print("no witness within {} networks\n", ce_budget);
                return 1;
            }
            const auto check = verify_witness(*w);
            fmt::print("witness after {} networks: x={}, gain under h {:.6f}, under h' {:.6f}; verifier {}\n",
                       w->networks_tried, w->x, w->gain_small, w->gain_large, check.ok ? "ok" : "FAILED");
            if (!ce_out.empty()) write_text(ce_out, to_json(*w).dump(1) + "\n");
            return check.ok ? 0 : 1;
        } else if (*sv_cmd) {
            SessionStore::Options opts;
            if (!sv_data.empty()) opts.data_dir = sv_data;
            opts.default_planner = planner_spec_from_name(sv_planner);
            SessionStore store(opts);
            httplib::Server server;
            mount_session_api(server, store);
            if (!sv_static.empty() && !server.set_mount_point("/", sv_static)) {
                throw IoError(fmt::format("cannot serve {}", sv_static));
            }
            fmt::print(stderr, "listening on {}:{} ({} sessions restored)\n", sv_host, sv_port, store.ids().size());
            if (!server.listen(sv_host, sv_port)) throw IoError(fmt::format("cannot bind {}:{}", sv_host, sv_port));
        }
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
