#include "robo/engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "robo/hmm.hpp"
#include "robo/linalg.hpp"

namespace robo {

RiskProfilePath risk_profile_path(ProfileKind kind, double gamma_start, double gamma_end,
                                  const std::vector<double>& grid, int T_rebalances,
                                  std::uint64_t seed) {
    if (T_rebalances < 1) throw std::runtime_error("risk_profile_path: T must be >= 1");
    RiskProfilePath path;
    path.kind = kind;
    path.grid = grid;
    path.seed = seed;
    path.values.reserve(static_cast<size_t>(T_rebalances));
    switch (kind) {
        case ProfileKind::Static:
            path.values.assign(static_cast<size_t>(T_rebalances), gamma_start);
            break;
        case ProfileKind::Lifecycle: {
            if (gamma_end < gamma_start)
                throw std::runtime_error("lifecycle profile must de-risk: gamma_end >= gamma_start");
            if (T_rebalances == 1) {
                path.values.push_back(gamma_start);
            } else {
                const double slope = (gamma_end - gamma_start) / (T_rebalances - 1);
                for (int j = 0; j < T_rebalances; ++j)
                    path.values.push_back(gamma_start + slope * j);
            }
            break;
        }
        case ProfileKind::Noisy: {
            if (grid.empty()) throw std::runtime_error("noisy profile needs a non-empty grid");
            // One draw per rebalance date, in date order. Modulo indexing keeps
            // the stream identical across standard library implementations.
            std::mt19937_64 rng(seed);
            for (int j = 0; j < T_rebalances; ++j)
                path.values.push_back(grid[rng() % grid.size()]);
            break;
        }
    }
    return path;
}

Eigen::VectorXd initial_portfolio(double gamma_IW, const std::vector<int>& bond_group,
                                  int n_total) {
    return budget_weights(gamma_IW, bond_group, n_total).b;
}

Eigen::VectorXd initial_portfolio(double gamma_IW, int n_bonds, int n_total) {
    return budget_weights(gamma_IW, n_bonds, n_total).b;
}

ForecastSet sample_moment_forecasts(const Eigen::Ref<const Eigen::MatrixXd>& window, int H,
                                    int days_per_period) {
    const Eigen::Index T = window.rows();
    const Eigen::Index N = window.cols();
    if (T < 2) throw std::runtime_error("sample_moment_forecasts: need at least 2 rows");
    if (H < 1 || days_per_period < 1)
        throw std::runtime_error("sample_moment_forecasts: H and days_per_period must be >= 1");

    Eigen::VectorXd mean = window.colwise().mean().transpose();
    Eigen::MatrixXd centered = window.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(T - 1);

    Eigen::VectorXd period_mean = static_cast<double>(days_per_period) * mean;
    Eigen::MatrixXd period_cov = static_cast<double>(days_per_period) * symmetrize(cov);
    if (min_eigenvalue(period_cov) < 1e-12)
        period_cov += 1e-10 * Eigen::MatrixXd::Identity(N, N);

    ForecastSet fc;
    fc.horizon = H;
    fc.r_hat.assign(static_cast<size_t>(H), period_mean);
    fc.sigma_hat.assign(static_cast<size_t>(H), period_cov);
    return fc;
}

namespace {

// Per-solve target rows: the group weight walks from the profile coefficient
// at activation to gamma_target, reaching it exactly at the last rebalance.
std::optional<TargetConstraint> target_for_rebalance(const StrategySpec& spec, int j,
                                                     int periods) {
    if (!spec.gamma_target) return std::nullopt;
    const int H = spec.horizon_H;
    const int t_prime = std::max(0, periods - 2 * H);
    if (j + H - 1 < t_prime) return std::nullopt;  // no plan step reaches activation

    const double gamma_anchor = spec.profile.values[static_cast<size_t>(
        std::min(t_prime, periods - 1))];
    const double gamma_tgt = *spec.gamma_target;
    double lambda = 1.0;
    if (periods - 1 > t_prime)
        lambda = (std::clamp(j, t_prime, periods - 1) - t_prime) /
                 static_cast<double>(periods - 1 - t_prime);
    const double gamma_j = gamma_anchor + lambda * (gamma_tgt - gamma_anchor);

    TargetConstraint target;
    target.bond_group = spec.bond_group;
    target.risky_group = spec.risky_group;
    auto [w_b, w_s] = target_group_weights(gamma_j);
    target.w_bond = w_b;
    target.w_risky = w_s;
    target.active_from_step = std::max(0, t_prime - j);
    return target;
}

}  // namespace

WeightTrajectory run_receding_horizon(const StrategySpec& spec, const ReturnPanel& returns,
                                      const RebalanceCalendar& calendar,
                                      const EquilibriumWeights& eq_weights) {
    const Eigen::Index N = returns.values.cols();
    const int H = spec.horizon_H;
    if (H < 1) throw std::runtime_error("strategy horizon must be >= 1");
    if (calendar.horizon_T > returns.values.rows())
        throw std::runtime_error("calendar extends past the return panel");
    if (spec.profile.values.size() != static_cast<size_t>(calendar.periods))
        throw std::runtime_error("risk profile length must equal the number of rebalances");
    if (calendar.rebalance_dates.front() < spec.est_window)
        throw std::runtime_error("no trailing estimation window before the first rebalance");
    if (spec.bond_group.empty() || static_cast<int>(spec.bond_group.size()) >= N)
        throw std::runtime_error("bond group must be a non-empty proper subset of the assets");
    if (spec.forecaster == Forecaster::HmmBl &&
        eq_weights.weights.rows() < calendar.horizon_T)
        throw std::runtime_error("equilibrium weights do not cover the trading window");

    const double gamma_iw = spec.gamma_iw ? *spec.gamma_iw : spec.profile.values.front();
    Eigen::VectorXd pi_t = initial_portfolio(gamma_iw, spec.bond_group, static_cast<int>(N));

    WeightTrajectory traj;
    traj.assets = returns.assets;
    traj.weights.resize(calendar.periods, N);
    traj.dates.reserve(static_cast<size_t>(calendar.periods));
    traj.day_indices = calendar.rebalance_dates;

    for (int j = 0; j < calendar.periods; ++j) {
        const int t = calendar.rebalance_dates[static_cast<size_t>(j)];
        const std::string& label = returns.day_label(t);
        try {
            ForecastSet fc;
            if (spec.forecaster == Forecaster::HmmBl) {
                HmmParams params =
                    fit_hmm(returns.values.middleRows(t - spec.est_window, spec.est_window),
                            spec.seed);
                params.fitted_at = t;
                const double q_t = filter_normal_probability(
                    params, returns.values.middleRows(t - spec.est_window, spec.est_window));
                fc = build_forecast_set(params, q_t, eq_weights.weights.row(t).transpose(),
                                        spec.bl, H, calendar.step);
            } else {
                fc = sample_moment_forecasts(
                    returns.values.middleRows(t - spec.est_window, spec.est_window), H,
                    calendar.step);
            }
            fc.anchored_at = t;

            TradingConstraints cons = spec.constraints;
            cons.target = target_for_rebalance(spec, j, calendar.periods);

            const double coeff = spec.profile.values[static_cast<size_t>(j)];
            Eigen::VectorXd implemented;
            if (spec.criterion == Criterion::MeanVariance) {
                implemented = solve_mv_horizon(fc, pi_t, coeff, cons, H).front();
            } else {
                RiskBudget budget = budget_weights(coeff, spec.bond_group, static_cast<int>(N));
                implemented =
                    solve_mrb_sca(fc, pi_t, spec.phi, budget, cons, H, spec.sca).plan.front();
            }
            traj.weights.row(j) = implemented.transpose();
            traj.dates.push_back(label);
            pi_t = implemented;
        } catch (const InfeasibleError& e) {
            throw InfeasibleError("rebalance " + std::to_string(j) + " at " + label + ": " +
                                  e.what());
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("rebalance " + std::to_string(j) + " at " + label + ": " +
                                     e.what());
        }
    }
    return traj;
}

}  // namespace robo
