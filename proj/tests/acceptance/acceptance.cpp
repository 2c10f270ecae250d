// Acceptance suite: one PASS/FAIL line per criterion.
//   dime_acceptance 3          run criterion 3
//   dime_acceptance            run all eight
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "dime/harness/episode.hpp"
#include "dime/harness/exact.hpp"
#include "dime/harness/experiment.hpp"
#include "dime/harness/stats.hpp"
#include "dime/kernels/cascade_kernels.hpp"
#include "dime/pomdp/model.hpp"
#include "dime/psinet/voting.hpp"
#include "oracle.hpp"

using namespace dime;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string cli_path;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Edge make_edge(EdgeId id, NodeId s, NodeId d, double p, std::optional<double> u = std::nullopt) {
    return {id, s, d, p, u};
}

// Random network for property and oracle checks. Edges in id order; the
// last ones become uncertain (exactly `n_unc` when given and possible,
// otherwise up to `max_unc`).
UncertainNetwork random_net(std::mt19937_64& gen, int n, double density, int max_unc,
                            std::optional<int> exact_unc = std::nullopt) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (a != b && unif(gen) < density) pairs.emplace_back(a, b);
        }
    }
    const int wanted = exact_unc ? *exact_unc : static_cast<int>(gen() % static_cast<unsigned>(max_unc + 1));
    const int n_unc = std::min<int>(wanted, static_cast<int>(pairs.size()));
    std::vector<Edge> c, u;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double p = unif(gen) < 0.15 ? 1.0 : 0.05 + 0.9 * unif(gen);
        if (static_cast<int>(pairs.size() - i) <= n_unc) {
            u.push_back(make_edge(static_cast<EdgeId>(i), pairs[i].first, pairs[i].second, p, 0.1 + 0.8 * unif(gen)));
        } else {
            c.push_back(make_edge(static_cast<EdgeId>(i), pairs[i].first, pairs[i].second, p));
        }
    }
    return UncertainNetwork(n, c, u);
}

// ---------------------------------------------------------------------------
// 1. Monte Carlo through generative_step against exhaustive enumeration.

// Fixed adaptive policy: node a first; in round 2 node b if any observed
// edge of a was present, else node c.
struct TinyPolicy {
    int a, b, c;
};

double exact_policy_spread(const UncertainNetwork& net, const TinyPolicy& pol, int rounds, int steps) {
    const auto edges = oracle::plain_edges(net);
    std::vector<std::size_t> unc;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (edges[i].uncertain) unc.push_back(i);
    }
    double total = 0.0;
    for (unsigned fx = 0; fx < (1U << unc.size()); ++fx) {
        std::vector<bool> present(edges.size(), true);
        double pf = 1.0;
        bool any_seen_present = false;
        for (std::size_t j = 0; j < unc.size(); ++j) {
            const bool on = fx >> j & 1U;
            present[unc[j]] = on;
            pf *= on ? edges[unc[j]].u : 1.0 - edges[unc[j]].u;
            if (on && edges[unc[j]].src == pol.a) any_seen_present = true;
        }
        std::map<unsigned, double> dist{{1U << pol.a, 1.0}};
        dist = oracle::advance(edges, present, net.size(), dist, steps);
        if (rounds == 2) {
            const int second = any_seen_present ? pol.b : pol.c;
            std::map<unsigned, double> seeded;
            for (const auto& [w, pr] : dist) seeded[w | 1U << second] += pr;
            dist = oracle::advance(edges, present, net.size(), seeded, steps);
        }
        total += pf * oracle::mean_size(dist);
    }
    return total;
}

Outcome criterion_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr int kSims = 100000;
    constexpr double kMaxSe = 3.0;
    constexpr double kMaxAbs = 0.05;
    std::mt19937_64 gen(2024);
    int failures = 0;
    double worst_z = 0.0, worst_abs = 0.0;
    // Every (N, |E_u|, L, T) combination once: N 2..5, |E_u| 0..3, L and T 1..2.
    int i = 0;
    for (int cell = 0; cell < 64; ++cell, ++i) {
        const int n = 2 + cell % 4;
        const int n_unc = std::min((cell / 4) % 4, n * (n - 1));
        const int steps = 1 + (cell / 16) % 2;
        const int rounds = 1 + cell / 32;
        auto net = random_net(gen, n, 0.6, 3, n_unc);
        while (static_cast<int>(net.uncertain_count()) < n_unc) net = random_net(gen, n, 0.9, 3, n_unc);
        TinyPolicy pol{static_cast<int>(gen() % static_cast<unsigned>(n)), 0, 0};
        pol.b = (pol.a + 1) % n;
        pol.c = (pol.a + n - 1) % n;
        const double exact = exact_policy_spread(net, pol, rounds, steps);

        RunningStats stats;
        Rng rng = make_rng(derive_seed(99, static_cast<std::uint64_t>(i)));
        for (int s = 0; s < kSims; ++s) {
            PomdpState st{NodeMask(n), std::vector<std::uint8_t>(net.uncertain_count())};
            for (std::size_t e = 0; e < st.f.size(); ++e) st.f[e] = bernoulli(rng, *net.uncertain_edges()[e].u) ? 1 : 0;
            auto g = generative_step(net, st, Action({pol.a}), steps, rng);
            if (rounds == 2) {
                bool seen = false;
                for (const auto& o : g.obs.entries) seen = seen || o.bit == 1;
                g = generative_step(net, g.next, Action({seen ? pol.b : pol.c}), steps, rng);
            }
            stats.add(g.next.w.count());
        }
        const double err = std::abs(stats.mean() - exact);
        const double z = stats.std_error() > 0 ? err / stats.std_error() : (err > 1e-12 ? INFINITY : 0.0);
        worst_z = std::max(worst_z, z);
        worst_abs = std::max(worst_abs, err);
        if (z > kMaxSe || err > kMaxAbs) ++failures;
    }
    const double secs = seconds_since(t0);
    return {failures == 0 && secs < 120,
            fmt::format("{} networks x {} sims, worst |err| {:.4f} ({:.2f} SE), {} failures, {:.1f}s", i, kSims,
                        worst_abs, worst_z, failures, secs)};
}

// ---------------------------------------------------------------------------
// 2. PSINET-W against degree centrality on small community networks.

const char* kCommunity30 = R"({
  "name": "community30",
  "seed": 7,
  "planners": ["dc", {"kind": "psinet", "variant": "w", "delta": 8, "eta": 64, "M": 16}],
  "networks": [{"generator": "community", "n": 30, "blocks": 3, "p_in": 0.12, "p_out": 0.02,
                "uncertain_frac": 0.5, "p": [0.1, 0.5], "u": [0.2, 0.8], "seed": 1, "count": 8}],
  "K": 2, "T": 3, "L": 3, "episodes": 50, "particles": 256
})";

std::vector<double> pooled_spreads(const ExperimentReport& r, const std::string& planner, int k) {
    std::vector<double> out;
    for (const auto& cell : r.cells) {
        if (cell.planner != planner || cell.k != k) continue;
        for (const auto& ep : cell.episodes) out.push_back(ep.dnf ? std::nan("") : ep.final_spread);
    }
    return out;
}

Outcome criterion_psinet_vs_dc() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr double kAlpha = 0.05;
    constexpr double kMinGain = 0.15;
    const auto report = run_experiment(parse_experiment_config(kCommunity30));
    const auto ps = pooled_spreads(report, "psinet-w", 2);
    const auto dc = pooled_spreads(report, "dc", 2);
    const auto t = paired_t_test_greater(ps, dc);
    const double m_ps = mean_of(ps), m_dc = mean_of(dc);
    const double gain = m_ps / m_dc - 1.0;
    const double secs = seconds_since(t0);
    return {t.p_value < kAlpha && gain >= kMinGain && secs < 900,
            fmt::format("psinet-w {:.2f} vs dc {:.2f} over {} paired episodes, +{:.1f}%, p={:.2e}, {:.0f}s", m_ps, m_dc,
                        t.n, 100 * gain, t.p_value, secs)};
}

// ---------------------------------------------------------------------------
// 3 and 4. 150-node two-community benchmark.

const char* kCommunity150Network = R"({"generator": "community", "n": 150, "blocks": 2, "p_in": 0.03,
  "p_out": 0.002, "uncertain_frac": 0.5, "p": [0.1, 0.4], "u": [0.2, 0.8], "seed": 150})";

ExperimentConfig community150(const std::string& planners, const std::string& ks, int episodes) {
    return parse_experiment_config(fmt::format(R"({{"name": "community150", "seed": 3, "planners": {},
        "networks": [{}], "K": {}, "T": 5, "L": 3, "episodes": {}, "particles": 256, "round_budget_s": 60}})",
                                               planners, kCommunity150Network, ks, episodes));
}

double max_round_ms(const CellReport& cell) {
    double m = 0.0;
    for (const auto& ep : cell.episodes) {
        for (const auto& r : ep.history) m = std::max(m, r.wall_ms);
    }
    return m;
}

Outcome criterion_scale_up() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr double kBudgetMs = 60000.0;
    constexpr double kMinGain = 0.15;
    bool pass = true;
    std::string detail;

    // HEAL at every K, all rounds inside the budget.
    for (auto [k, episodes] : {std::pair{2, 10}, std::pair{6, 10}}) {
        const auto r = run_experiment(community150(R"(["heal"])", std::to_string(k), episodes));
        const auto& cell = r.cells.at(0);
        const bool ok = cell.dnf() == 0 && max_round_ms(cell) < kBudgetMs;
        pass = pass && ok;
        detail += fmt::format("heal K={} dnf {} max {:.0f}ms; ", k, cell.dnf(), max_round_ms(cell));
    }
    const auto r4 = run_experiment(community150(R"(["dc", "heal"])", "4", 50));
    const auto* heal = r4.find("heal", "community-n150-s150", 4);
    const auto* dc = r4.find("dc", "community-n150-s150", 4);
    const bool heal_ok = heal->dnf() == 0 && max_round_ms(*heal) < kBudgetMs;
    const double gain = heal->mean_spread() / dc->mean_spread() - 1.0;
    pass = pass && heal_ok && gain >= kMinGain;
    detail += fmt::format("heal K=4 dnf {} max {:.0f}ms, {:.2f} vs dc {:.2f} (+{:.1f}%); ", heal->dnf(),
                          max_round_ms(*heal), heal->mean_spread(), dc->mean_spread(), 100 * gain);

    // Full-fidelity PSINET-W runs out of time once K >= 4.
    const auto rp = run_experiment(community150(
        R"([{"kind": "psinet", "variant": "w", "delta": 64, "eta": 256, "M": 500}])", "[4, 6]", 1));
    for (const auto& cell : rp.cells) {
        const auto& ep = cell.episodes.at(0);
        pass = pass && ep.dnf;
        detail += fmt::format("psinet-w M=500 K={} {}; ", cell.k,
                              ep.dnf ? fmt::format("DNF in round {}", ep.dnf_round.value_or(0)) : std::string("finished"));
    }
    const double secs = seconds_since(t0);
    pass = pass && secs < 1800;
    return {pass, detail + fmt::format("{:.0f}s", secs)};
}

Outcome criterion_heal_vs_heal_t() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_experiment(community150(R"(["heal", "heal-t"])", "4", 50));
    const auto* heal = r.find("heal", "community-n150-s150", 4);
    const auto* healt = r.find("heal-t", "community-n150-s150", 4);
    const bool complete = heal->dnf() == 0 && healt->dnf() == 0;
    const double gap = heal->mean_spread() / healt->mean_spread() - 1.0;
    return {complete && heal->mean_spread() >= healt->mean_spread(),
            fmt::format("heal {:.2f} (se {:.2f}) vs heal-t {:.2f} (se {:.2f}) over 50 episodes, gap {:+.1f}%, {:.0f}s",
                        heal->mean_spread(), heal->std_error(), healt->mean_spread(), healt->std_error(), 100 * gap,
                        seconds_since(t0))};
}

// ---------------------------------------------------------------------------
// 5. Adaptive submodularity fails: constructive witness.

Outcome criterion_counterexample() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng = make_rng(1);
    const auto w = find_adasub_counterexample(kDefaultSearchBudget, rng);
    if (!w) return {false, fmt::format("no witness in {} networks", kDefaultSearchBudget)};
    const auto check = verify_witness(*w);
    const double secs = seconds_since(t0);
    return {check.ok && secs < 300,
            fmt::format("witness after {} networks (N={}, L={}): gain {:.4f} under h, {:.4f} under h' (verified {:.4f} / "
                        "{:.4f}), {:.1f}s",
                        w->networks_tried, w->net.size(), w->steps, w->gain_small, w->gain_large, check.gain_small,
                        check.gain_large, secs)};
}

// ---------------------------------------------------------------------------
// 6. Voting rules against brute force.

Outcome criterion_voting() {
    constexpr int kProfiles = 10000;
    std::mt19937_64 gen(6);
    int mismatches = 0;
    for (int trial = 0; trial < kProfiles; ++trial) {
        const int nc = 1 + static_cast<int>(gen() % 5), nv = 1 + static_cast<int>(gen() % 7);
        std::vector<int> ids(static_cast<std::size_t>(nc));
        for (int i = 0; i < nc; ++i) ids[static_cast<std::size_t>(i)] = 3 * i + 1;
        std::vector<std::vector<int>> profile;
        std::vector<InstanceVote> votes;
        for (int v = 0; v < nv; ++v) {
            std::shuffle(ids.begin(), ids.end(), gen);
            profile.push_back(ids);
            InstanceVote iv;
            iv.instance_index = v;
            for (int c : ids) iv.ranking.emplace_back(std::vector<NodeId>{c});
            iv.values.assign(ids.size(), 0.0);
            votes.push_back(std::move(iv));
        }
        if (!(vote_copeland(votes) == Action({oracle::copeland_winner(profile)}))) ++mismatches;
    }
    int weight_errors = 0;
    for (int n = 0; n <= 20; ++n) {
        std::uint64_t c = 1;  // C(n, m), exact in 64 bits
        for (int m = 0; m <= n; ++m) {
            if (m > 0) c = c * static_cast<std::uint64_t>(n - m + 1) / static_cast<std::uint64_t>(m);
            if (binomial_vote_weight(n, m) != std::ldexp(static_cast<double>(c), -n)) ++weight_errors;
        }
    }
    return {mismatches == 0 && weight_errors == 0,
            fmt::format("{} Copeland profiles, {} mismatches; binomial weights n<=20, {} inexact", kProfiles, mismatches,
                        weight_errors)};
}

// ---------------------------------------------------------------------------
// 7. Diffusion properties under coupled randomness.

bool subset(const NodeMask& a, const NodeMask& b) {
    for (NodeId v = 0; v < a.size(); ++v) {
        if (a.test(v) && !b.test(v)) return false;
    }
    return true;
}

Outcome criterion_properties() {
    constexpr int kCases = 1000;
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::map<std::string, int> failures{{"seeds", 0}, {"p", 0}, {"L", 0}, {"edges", 0}, {"repeated", 0}, {"telescoping", 0}};

    for (int i = 0; i < kCases; ++i) {
        const int n = 4 + static_cast<int>(gen() % 20);
        const auto net = random_net(gen, n, 2.5 / n, 6);
        const int steps = 1 + static_cast<int>(gen() % 4);
        const std::uint64_t stream = gen();
        std::vector<std::uint8_t> kept(net.uncertain_count());
        for (auto& b : kept) b = unif(gen) < 0.5 ? 1 : 0;
        const CascadeModel model(net, kept);
        std::vector<NodeId> seeds{static_cast<NodeId>(gen() % static_cast<unsigned>(n))};
        const NodeMask w0 = mask_of(n, seeds);
        NodeMask base = w0;
        model.run(base, steps, stream);

        // Seeds: a superset seed set influences a superset.
        NodeMask more = w0;
        more.set(static_cast<NodeId>(gen() % static_cast<unsigned>(n)));
        model.run(more, steps, stream);
        if (!subset(base, more)) ++failures["seeds"];

        // p: raising every probability.
        std::vector<Edge> c2(net.certain_edges().begin(), net.certain_edges().end());
        std::vector<Edge> u2(net.uncertain_edges().begin(), net.uncertain_edges().end());
        for (auto& e : c2) e.p = std::min(1.0, e.p + unif(gen) * (1.0 - e.p));
        for (auto& e : u2) e.p = std::min(1.0, e.p + unif(gen) * (1.0 - e.p));
        const UncertainNetwork hotter(n, c2, u2);
        NodeMask hot = w0;
        CascadeModel(hotter, kept).run(hot, steps, stream);
        if (!subset(base, hot)) ++failures["p"];

        // L: one more cascade round.
        NodeMask longer = w0;
        model.run(longer, steps + 1, stream);
        if (!subset(base, longer)) ++failures["L"];

        // Edges: switch on kept bits, and append extra edges after the
        // existing ones so every existing edge keeps its coins.
        auto kept_more = kept;
        for (auto& b : kept_more) b = b || unif(gen) < 0.5;
        std::vector<Edge> u3(net.uncertain_edges().begin(), net.uncertain_edges().end());
        EdgeId next_id = 1000;
        for (int extra = 0; extra < 3; ++extra) {
            const NodeId a = static_cast<NodeId>(gen() % static_cast<unsigned>(n));
            const NodeId b = static_cast<NodeId>(gen() % static_cast<unsigned>(n));
            bool dup = a == b;
            for (std::size_t g = 0; g < net.edge_count() && !dup; ++g) dup = net.edge(g).src == a && net.edge(g).dst == b;
            for (const auto& e : u3) dup = dup || (e.src == a && e.dst == b);
            if (dup) continue;
            u3.push_back(make_edge(next_id++, a, b, 0.05 + 0.9 * unif(gen), 0.5));
            kept_more.push_back(1);
        }
        const UncertainNetwork denser(n, {net.certain_edges().begin(), net.certain_edges().end()}, u3);
        NodeMask dense = w0;
        CascadeModel(denser, kept_more).run(dense, steps, stream);
        if (!subset(base, dense)) ++failures["edges"];

        // Repeated activation covers the single-chance cascade on the same coins.
        const InstantiatedNetwork inst(net, kept);
        std::vector<std::uint64_t> keys;
        for (int t = 0; t < steps; ++t) keys.push_back(round_key(stream, t));
        const auto src = net.edge_src(), dst = net.edge_dst();
        const auto once = oracle::single_chance({src.begin(), src.end()}, {dst.begin(), dst.end()}, inst.limits(),
                                                {w0.data(), w0.data() + n}, keys);
        for (NodeId v = 0; v < n; ++v) {
            if (once[static_cast<std::size_t>(v)] && !base.test(v)) {
                ++failures["repeated"];
                break;
            }
        }

        // Rewards telescope to the final spread; W never shrinks.
        auto planner = make_planner(planner_spec_from_name(i % 2 ? "random" : "dc"));
        const int k = 1 + static_cast<int>(gen() % 2);
        const int rounds = std::min(1 + static_cast<int>(gen() % 3), n / k);
        EpisodeOptions opts;
        opts.n_particles = 8;
        const auto ep = run_episode(net, *planner, k, rounds, steps, gen(), opts);
        int sum = 0;
        bool ok = true;
        std::vector<NodeId> prev;
        for (const auto& r : ep.history) {
            sum += r.reward;
            ok = ok && r.reward >= 0 && std::includes(r.hidden_w.begin(), r.hidden_w.end(), prev.begin(), prev.end()) &&
                 static_cast<int>(r.hidden_w.size()) == static_cast<int>(prev.size()) + r.reward;
            prev = r.hidden_w;
        }
        if (!ok || sum != ep.final_spread) ++failures["telescoping"];
    }
    int total = 0;
    std::string parts;
    for (const auto& [name, f] : failures) {
        total += f;
        parts += fmt::format("{} {}, ", name, f);
    }
    return {total == 0, fmt::format("{} cases; failures: {}", kCases, parts.substr(0, parts.size() - 2))};
}

// ---------------------------------------------------------------------------
// 8. Reproducible results CSV.

const char* kDeterminismConfigs[] = {
    R"({"name": "mix", "seed": 5, "planners": ["dc", "random", "greedy", "heal-t", {"kind": "psinet", "variant": "s", "delta": 8, "eta": 16, "M": 8},
        {"kind": "psinet", "variant": "c", "delta": 4, "eta": 8, "M": 4}, {"kind": "heal", "delta": 8}],
        "networks": [{"generator": "er", "n": 14, "p_in": 0.15, "uncertain_frac": 0.5, "seed": 2},
                     {"generator": "ws", "n": 16, "ring_k": 4, "rewire": 0.2, "uncertain_frac": 0.3, "seed": 4}],
        "K": [1, 2], "T": 3, "L": 2, "episodes": 2, "particles": 32})",
    R"({"name": "fig1", "seed": 123456789, "planners": ["psinet-w", "heal"],
        "networks": [{"file": "fig1.json"}], "K": 1, "T": 2, "L": 2, "episodes": 3, "particles": 64})",
};

std::string results_csv(const ExperimentConfig& cfg) {
    std::ostringstream out;
    write_results_csv(run_experiment(cfg), out);
    return out.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome criterion_determinism() {
    int identical = 0, compared = 0;
    for (const char* text : kDeterminismConfigs) {
        const auto cfg = parse_experiment_config(text, DIME_DATA_DIR);
        ++compared;
        if (results_csv(cfg) == results_csv(cfg)) ++identical;
    }
    std::string cli_note = "CLI not checked";
    if (!cli_path.empty()) {
        // Two separate processes, one per kernel variant.
        const auto dir = std::filesystem::temp_directory_path() / fmt::format("dime-accept-{}", ::getpid());
        std::filesystem::create_directories(dir);
        const auto cfg_path = dir / "mix.json";
        auto doc = nlohmann::json::parse(kDeterminismConfigs[0]);
        std::ofstream(cfg_path) << doc.dump(2);
        std::vector<std::string> variants{"scalar"};
        if (kernels::supported(kernels::Level::avx2)) variants.push_back("avx2");
        else variants.push_back("scalar");
        std::vector<std::string> csvs;
        for (std::size_t i = 0; i < variants.size(); ++i) {
            const auto out = dir / fmt::format("run{}.csv", i);
            const auto cmd = fmt::format("\"{}\" --kernel {} run --config \"{}\" -o \"{}\" > /dev/null 2>&1", cli_path,
                                         variants[i], cfg_path.string(), out.string());
            if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed: " + cmd};
            csvs.push_back(slurp(out));
        }
        ++compared;
        if (!csvs[0].empty() && csvs[0] == csvs[1]) ++identical;
        cli_note = fmt::format("CLI {} vs {} kernel {}", variants[0], variants[1],
                               csvs[0] == csvs[1] ? "identical" : "DIFFERENT");
        std::filesystem::remove_all(dir);
    }
    return {identical == compared, fmt::format("{}/{} run pairs byte-identical; {}", identical, compared, cli_note)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"MC spread matches exact enumeration", criterion_oracle},
    {"PSINET-W beats degree centrality", criterion_psinet_vs_dc},
    {"HEAL scales where PSINET-W does not", criterion_scale_up},
    {"HEAL at least matches HEAL-T", criterion_heal_vs_heal_t},
    {"adaptive submodularity counterexample", criterion_counterexample},
    {"voting rules", criterion_voting},
    {"diffusion properties", criterion_properties},
    {"deterministic results CSV", criterion_determinism},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DIME acceptance suite"};
    std::vector<int> which;
    app.add_option("criteria", which, "criteria to run (default: all)")->check(CLI::Range(1, 8));
    app.add_option("--cli", cli_path, "dime executable for the cross-process determinism check");
    CLI11_PARSE(app, argc, argv);
    if (which.empty()) {
        for (int i = 1; i <= 8; ++i) which.push_back(i);
    }
    int failed = 0;
    for (int i : which) {
        const auto& [title, fn] = kCriteria[static_cast<std::size_t>(i - 1)];
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        fmt::print("criterion {} {}: {} ({})\n", i, o.pass ? "PASS" : "FAIL", title, o.detail);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
