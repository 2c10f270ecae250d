#include "dime/harness/experiment.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "dime/core/error.hpp"
#include "dime/harness/stats.hpp"
#include "dime/netcore/network_io.hpp"

namespace dime {
namespace {

UncertainNetwork with_name(const UncertainNetwork& net, std::string name) {
    NetworkMeta meta = net.meta();
    meta.name = std::move(name);
    return UncertainNetwork(net.size(), {net.certain_edges().begin(), net.certain_edges().end()},
                            {net.uncertain_edges().begin(), net.uncertain_edges().end()}, std::move(meta));
}

std::pair<double, double> range_of(const nlohmann::json& j, const char* key, std::pair<double, double> dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    if (v.is_number()) return {v.get<double>(), v.get<double>()};
    if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
    throw ValidationError(fmt::format("\"{}\" must be a number or a [lo, hi] pair", key));
}

NetworkSource parse_source(const nlohmann::json& j, const std::filesystem::path& base) {
    NetworkSource s;
    if (j.contains("file")) {
        s.generator = "file";
        s.file = j.at("file").get<std::string>();
        if (s.file.is_relative()) s.file = base / s.file;
        return s;
    }
    s.generator = j.value("generator", std::string("community"));
    if (s.generator != "community" && s.generator != "er" && s.generator != "ws") {
        throw ValidationError(fmt::format("unknown generator '{}'", s.generator));
    }
    s.n = j.value("n", s.n);
    s.blocks = j.value("blocks", s.blocks);
    s.p_in = j.value("p_in", j.value("edge_p", s.p_in));
    s.p_out = j.value("p_out", s.p_out);
    s.ring_k = j.value("ring_k", s.ring_k);
    s.rewire = j.value("rewire", s.rewire);
    s.uncertainty.uncertain_frac = j.value("uncertain_frac", s.uncertainty.uncertain_frac);
    s.uncertainty.p_range = range_of(j, "p", s.uncertainty.p_range);
    s.uncertainty.u_range = range_of(j, "u", s.uncertainty.u_range);
    s.seed = j.value("seed", s.seed);
    s.count = j.value("count", s.count);
    if (s.count < 1) throw ValidationError("network count must be >= 1");
    return s;
}

std::string action_cell(const Action& a) {
    std::string s;
    for (NodeId v : a.nodes()) {
        if (!s.empty()) s += ' ';
        s += std::to_string(v);
    }
    return s;
}

}  // namespace

std::vector<UncertainNetwork> NetworkSource::build() const {
    std::vector<UncertainNetwork> out;
    if (generator == "file") {
        UncertainNetwork net = load_network(file);
        if (net.meta().name.empty()) net = with_name(net, file.stem().string());
        out.push_back(std::move(net));
        return out;
    }
    for (int i = 0; i < count; ++i) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
        UncertainNetwork net;
        if (generator == "community") {
            net = generate_community(n, blocks, p_in, p_out, uncertainty, s);
        } else if (generator == "er") {
            net = generate_er(n, p_in, uncertainty, s);
        } else {
            net = generate_ws(n, ring_k, rewire, uncertainty, s);
        }
        out.push_back(with_name(net, fmt::format("{}-n{}-s{}", generator, n, s)));
    }
    return out;
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(fmt::format("experiment config: {}", e.what()));
    }
    ExperimentConfig cfg;
    try {
        cfg.echo = j;
        cfg.name = j.value("name", cfg.name);
        cfg.seed = j.value("seed", cfg.seed);
        if (!j.contains("planners") || !j.at("planners").is_array() || j.at("planners").empty()) {
            throw ValidationError("experiment config: \"planners\" must be a non-empty list");
        }
        for (const auto& p : j.at("planners")) cfg.planners.push_back(parse_planner_spec(p));
        if (!j.contains("networks") || !j.at("networks").is_array() || j.at("networks").empty()) {
            throw ValidationError("experiment config: \"networks\" must be a non-empty list");
        }
        const std::filesystem::path base = j.contains("base_dir") ? std::filesystem::path(j.at("base_dir").get<std::string>()) : base_dir;
        for (const auto& n : j.at("networks")) cfg.networks.push_back(parse_source(n, base));
        if (j.contains("K")) {
            cfg.ks = j.at("K").is_array() ? j.at("K").get<std::vector<int>>() : std::vector<int>{j.at("K").get<int>()};
        }
        cfg.rounds = j.value("T", cfg.rounds);
        cfg.steps = j.value("L", cfg.steps);
        cfg.episodes = j.value("episodes", cfg.episodes);
        cfg.particles = j.value("particles", cfg.particles);
        if (j.contains("round_budget_s")) cfg.round_budget_s = j.at("round_budget_s").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(fmt::format("experiment config: {}", e.what()));
    }
    if (cfg.ks.empty()) throw ValidationError("experiment config: K list is empty");
    for (int k : cfg.ks) {
        if (k < 1) throw ValidationError("experiment config: K must be >= 1");
    }
    if (cfg.rounds < 0 || cfg.steps < 0) throw ValidationError("experiment config: T and L must be >= 0");
    if (cfg.episodes < 1) throw ValidationError("experiment config: episodes must be >= 1");
    if (cfg.particles < 1) throw ValidationError("experiment config: particles must be >= 1");
    if (cfg.round_budget_s && *cfg.round_budget_s <= 0) throw ValidationError("round_budget_s must be positive");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str(), path.parent_path());
}

std::vector<double> CellReport::spreads() const {
    std::vector<double> out;
    for (const auto& e : episodes) {
        if (!e.dnf) out.push_back(e.final_spread);
    }
    return out;
}

int CellReport::dnf() const {
    int n = 0;
    for (const auto& e : episodes) n += e.dnf ? 1 : 0;
    return n;
}

double CellReport::mean_spread() const {
    const auto s = spreads();
    return mean_of(s);
}

double CellReport::std_error() const {
    const auto s = spreads();
    return std_error_of(s);
}

double CellReport::mean_round_ms() const {
    double total = 0.0;
    int n = 0;
    for (const auto& e : episodes) {
        for (const auto& r : e.history) {
            total += r.wall_ms;
            ++n;
        }
    }
    return n ? total / n : 0.0;
}

const CellReport* ExperimentReport::find(const std::string& planner, const std::string& network, int k) const {
    for (const auto& c : cells) {
        if (c.planner == planner && c.network == network && c.k == k) return &c;
    }
    return nullptr;
}

std::uint64_t episode_seed(std::uint64_t root, std::size_t network_index, int k, int episode) {
    return derive_seed(derive_seed(root, network_index), static_cast<std::uint64_t>(k),
                       static_cast<std::uint64_t>(episode));
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
    if (cfg.planners.empty()) throw ValidationError("experiment has no planners");
    ExperimentReport report;
    report.config = cfg;
    std::vector<UncertainNetwork> nets;
    for (const auto& src : cfg.networks) {
        for (auto& n : src.build()) nets.push_back(std::move(n));
    }
    EpisodeOptions opts;
    opts.n_particles = cfg.particles;
    opts.round_budget_s = cfg.round_budget_s;
    for (std::size_t ni = 0; ni < nets.size(); ++ni) {
        for (int k : cfg.ks) {
            for (const auto& spec : cfg.planners) {
                auto planner = make_planner(spec);
                CellReport cell{spec.label(), nets[ni].meta().name, k, {}};
                for (int e = 0; e < cfg.episodes; ++e) {
                    cell.episodes.push_back(run_episode(nets[ni], *planner, k, cfg.rounds, cfg.steps,
                                                        episode_seed(cfg.seed, ni, k, e), opts));
                    if (progress) progress(cell, cell.episodes.back());
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

void write_results_csv(const ExperimentReport& report, std::ostream& out) {
    out << "planner,network,K,episode,seed,round,action,reward,spread,stderr,episodes,dnf\n";
    for (const auto& c : report.cells) {
        int ep = 0;
        for (const auto& e : c.episodes) {
            int t = 0;
            int spread = 0;
            for (const auto& r : e.history) {
                spread = static_cast<int>(r.hidden_w.size());
                out << fmt::format("{},{},{},{},{},{},{},{},{},,,0\n", c.planner, c.network, c.k, ep, e.root_seed,
                                   ++t, action_cell(r.action), r.reward, spread);
            }
            if (e.dnf) {
                out << fmt::format("{},{},{},{},{},{},,,{},,,1\n", c.planner, c.network, c.k, ep, e.root_seed,
                                   *e.dnf_round, spread);
            }
            ++ep;
        }
        out << fmt::format("{},{},{},,,summary,,,{:.6f},{:.6f},{},{}\n", c.planner, c.network, c.k, c.mean_spread(),
                           c.std_error(), c.episodes.size(), c.dnf());
    }
}

void write_timings_csv(const ExperimentReport& report, std::ostream& out) {
    out << "planner,network,K,episode,round,wall_ms\n";
    for (const auto& c : report.cells) {
        int ep = 0;
        for (const auto& e : c.episodes) {
            int t = 0;
            for (const auto& r : e.history) {
                out << fmt::format("{},{},{},{},{},{:.3f}\n", c.planner, c.network, c.k, ep, ++t, r.wall_ms);
            }
            ++ep;
        }
    }
}

std::string format_summary(const ExperimentReport& report) {
    std::string s = fmt::format("{:<12} {:<24} {:>3} {:>10} {:>8} {:>6} {:>5} {:>12}\n", "planner", "network", "K",
                                "spread", "stderr", "eps", "dnf", "ms/round");
    for (const auto& c : report.cells) {
        s += fmt::format("{:<12} {:<24} {:>3} {:>10.3f} {:>8.3f} {:>6} {:>5} {:>12.1f}\n", c.planner, c.network, c.k,
                         c.mean_spread(), c.std_error(), c.episodes.size(), c.dnf(), c.mean_round_ms());
    }
    return s;
}

}  // namespace dime
