#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "robo/market_data.hpp"

namespace robo::synth {

// Deterministic two-regime market generator. Used to build the bundled
// reference dataset (8 ETF-like assets: 4 bond-class, 4 risky, plus an
// equity index) and as the sampler behind the HMM recovery tests. All
// randomness comes from a splitmix64/Box-Muller stream, so output is
// byte-stable across platforms.

struct RegimeModel {
    Eigen::VectorXd mu_n, mu_c;        // daily means
    Eigen::MatrixXd sigma_n, sigma_c;  // daily covariances
    double p_nn = 0.0, p_cc = 0.0;
};

// Returns (panel of daily returns, true regime per row; 0 = normal).
std::pair<Eigen::MatrixXd, std::vector<int>> sample_regime_panel(const RegimeModel& model,
                                                                 int days, std::uint64_t seed);

// The bundled 8-asset model: bond class {BND, EMB, LQD, MUB} and risky class
// {VEA, VNQ, VTI, VWO}, persistent normal regime, deep contractions.
RegimeModel default_model();

const std::vector<std::string>& default_assets();
const std::vector<int>& default_bond_indices();

struct Dataset {
    PriceTable prices;
    PriceTable aum;
    PriceTable index;           // single SPX-like column
    std::vector<int> regimes;   // true regime per return row
};

// `days` return rows (days + 1 price rows), dated on a synthetic business
// calendar from 2010-01-04.
Dataset generate(const RegimeModel& model, int days, std::uint64_t seed);
Dataset generate_default(int days, std::uint64_t seed);

void write_table_csv(const PriceTable& table, const std::string& path);

}  // namespace robo::synth
