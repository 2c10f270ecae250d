#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dime/harness/episode.hpp"
#include "dime/netcore/generators.hpp"

namespace dime {

// Where the networks of an experiment come from: a generator call or a file.
struct NetworkSource {
    std::string generator;   // "community" | "er" | "ws" | "file"
    std::filesystem::path file;
    int n = 30;
    int blocks = 2;
    double p_in = 0.1, p_out = 0.01;  // community; er uses p_in as edge probability
    int ring_k = 4;                   // ws
    double rewire = 0.1;              // ws
    UncertaintyParams uncertainty;
    std::uint64_t seed = 1;
    int count = 1;                    // seeds seed .. seed + count - 1

    std::vector<UncertainNetwork> build() const;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::uint64_t seed = 1;
    std::vector<PlannerSpec> planners;
    std::vector<NetworkSource> networks;
    std::vector<int> ks{1};
    int rounds = 1;
    int steps = 1;
    int episodes = 1;
    int particles = kDefaultParticles;
    std::optional<double> round_budget_s;

    nlohmann::json echo;  // the parsed config document
};

// Parses a JSON experiment config; throws ValidationError / ParseError.
// Relative network files resolve against base_dir (or the "base_dir" key).
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct CellReport {
    std::string planner;
    std::string network;
    int k = 0;
    std::vector<EpisodeRecord> episodes;  // in episode order, DNF included

    std::vector<double> spreads() const;   // finished episodes only
    int dnf() const;
    double mean_spread() const;
    double std_error() const;
    double mean_round_ms() const;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<CellReport> cells;

    const CellReport* find(const std::string& planner, const std::string& network, int k) const;
};

// Seed of one episode; shared by every planner so they face the same truth.
std::uint64_t episode_seed(std::uint64_t root, std::size_t network_index, int k, int episode);

using ProgressFn = std::function<void(const CellReport& cell, const EpisodeRecord& ep)>;

ExperimentReport run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// Tidy results: one row per (planner, network, K, episode, round) plus one
// summary row per cell. Contains no timings, so it is reproducible.
void write_results_csv(const ExperimentReport& report, std::ostream& out);
// Planner wall time per round.
void write_timings_csv(const ExperimentReport& report, std::ostream& out);
std::string format_summary(const ExperimentReport& report);

}  // namespace dime
