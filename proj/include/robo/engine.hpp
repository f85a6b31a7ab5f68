#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robo/allocation.hpp"
#include "robo/black_litterman.hpp"
#include "robo/market_data.hpp"

namespace robo {

// Receding-horizon loop: at each rebalance date refit the forecaster on the
// trailing window, solve the horizon problem for the date's risk profile,
// implement only the first planned step, advance.

enum class ProfileKind { Static, Lifecycle, Noisy };

struct RiskProfilePath {
    ProfileKind kind = ProfileKind::Static;
    std::vector<double> values;  // one coefficient per rebalance date
    std::vector<double> grid;    // admissible set (used by the noisy kind)
    std::uint64_t seed = 0;
};

// static: constant gamma_start. lifecycle: linear from gamma_start to
// gamma_end (must not de-risk backwards). noisy: i.i.d. draws from grid.
RiskProfilePath risk_profile_path(ProfileKind kind, double gamma_start, double gamma_end,
                                  const std::vector<double>& grid, int T_rebalances,
                                  std::uint64_t seed);

// pi_0 = budget weights of the initial risk-profile coefficient gamma_IW.
Eigen::VectorXd initial_portfolio(double gamma_IW, const std::vector<int>& bond_group,
                                  int n_total);
Eigen::VectorXd initial_portfolio(double gamma_IW, int n_bonds, int n_total);

// Sample mean / unbiased sample covariance of the window, scaled to period
// granularity by days_per_period summation and replicated H times. A singular
// period covariance is repaired with +1e-10 I.
ForecastSet sample_moment_forecasts(const Eigen::Ref<const Eigen::MatrixXd>& window, int H,
                                    int days_per_period);

enum class Criterion { MeanVariance, RiskBudgeting };
enum class Forecaster { HmmBl, SampleMoments };

struct StrategySpec {
    Criterion criterion = Criterion::MeanVariance;
    Forecaster forecaster = Forecaster::HmmBl;
    int horizon_H = 1;
    TradingConstraints constraints;
    RiskProfilePath profile;             // gamma path (MV) or gamma_R path (MRB)
    double phi = 0.1;                    // MRB enforcement strength
    BlConfig bl;                         // HMM-BL forecaster settings
    std::uint64_t seed = 0;
    int est_window = 1260;               // trailing estimation rows (~5 years)
    std::vector<int> bond_group;         // lower-risk class, by column index
    std::vector<int> risky_group;
    std::optional<double> gamma_target;  // enables the terminal target constraint
    std::optional<double> gamma_iw;      // defaults to the profile's first value
    ScaOptions sca;                      // MRB SCA tuning
};

struct WeightTrajectory {
    std::vector<std::string> dates;  // decision-date labels
    std::vector<int> day_indices;    // day index of each rebalance
    std::vector<std::string> assets;
    Eigen::MatrixXd weights;  // one simplex row per rebalance
    bool planned_only = false;
};

WeightTrajectory run_receding_horizon(const StrategySpec& spec, const ReturnPanel& returns,
                                      const RebalanceCalendar& calendar,
                                      const EquilibriumWeights& eq_weights);

}  // namespace robo
