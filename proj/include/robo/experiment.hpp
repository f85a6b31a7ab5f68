#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robo/backtest.hpp"
#include "robo/engine.hpp"

namespace robo {

// Experiment harness: a flat JSON config (scalar keys + list-valued grid
// keys) expands into a cartesian grid of runs per strategy. Each run writes
// weights_<id>.csv and wealth_<id>.csv; a consolidated metrics.csv is
// assembled in grid order after all runs finish. Runs are independent and
// deterministic, so the worker count never changes the output bytes.

struct ExperimentConfig {
    std::string prices_path;
    std::string aum_path;
    std::string index_path;  // optional

    int start = 0;
    int step = 1;
    int periods = 1;
    int est_window = 1260;
    std::uint64_t seed = 0;
    int trading_days = 252;

    std::vector<std::string> strategies;  // MV-BL, MRB-BL, MV-Est-myopic, MV-Est-MPC
    std::vector<int> horizon_grid = {7};
    std::vector<double> gamma_grid = {1.0};
    std::vector<double> gamma_r_grid = {0.5};
    std::vector<double> phi_grid = {0.1};
    std::vector<double> eta_grid = {0.0};
    std::vector<double> delta_grid = {std::numeric_limits<double>::infinity()};

    std::vector<std::string> bond_assets;

    BlConfig bl;
    ProfileKind profile = ProfileKind::Static;
    double gamma_end = 0.0;                  // lifecycle endpoint
    std::vector<double> noisy_gamma_grid;    // noisy-profile draw sets
    std::vector<double> noisy_gamma_r_grid;
    std::optional<double> gamma_target;

    bool benchmarks = false;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct RunDefinition {
    std::string id;
    std::string strategy;
    std::optional<double> gamma;
    std::optional<double> gamma_r;
    std::optional<double> phi;
    double eta = 0.0;
    double delta = std::numeric_limits<double>::infinity();
    int horizon = 1;
};

struct RunOutcome {
    RunDefinition def;
    bool ok = false;
    std::string error;
    MetricsReport metrics;
};

struct ExperimentResult {
    std::vector<RunOutcome> runs;
    std::string metrics_path;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                int jobs = 0);

// Shared CSV writers (atomic: temp file + rename).
void write_weights_csv(const WeightTrajectory& traj, const std::string& path);
void write_wealth_csv(const WealthSeries& wealth, const std::string& path);

// Strategy spec assembly used by both the grid runner and the single-run CLI.
StrategySpec make_strategy_spec(const ExperimentConfig& config, const RunDefinition& def,
                                const std::vector<std::string>& assets);

}  // namespace robo
