#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <vector>

#include "robo/black_litterman.hpp"
#include "robo/qp.hpp"

namespace robo {

// Compilation of the MV horizon criterion and the convexified MRB criterion
// into quadratic programs, plus the MRB sequential convex approximation loop.
// L1 transaction terms are compiled by nonnegative variable splitting
// (z+ - z- = step, z >= 0) so the QP kernel stays a pure quadratic solver.

// Terminal group-allocation constraint: sum of bond-group weights pinned to
// w_bond for planning steps >= active_from_step. A single group row suffices
// because weights sum to one.
struct TargetConstraint {
    std::vector<int> bond_group;
    std::vector<int> risky_group;
    double w_bond = 0.0;
    double w_risky = 0.0;
    int active_from_step = 0;
};

struct TradingConstraints {
    bool long_only = true;
    bool budget = true;  // weights sum to 1
    double turnover_delta = std::numeric_limits<double>::infinity();  // L1 bound per step
    double tc_eta = 0.0;                                              // L1 penalty scale
    std::vector<int> freeze_steps;  // steps s with pi_s == pi_{s-1} (pi_t for s = 0)
    std::optional<TargetConstraint> target;
};

struct RiskBudget {
    Eigen::VectorXd b;  // strictly positive, sums to 1
    double gamma_R = 0.0;
    std::vector<int> bond_group;
    std::vector<int> risky_group;
};

// Equal budgets within each class:
//   bonds  gamma_R / (N_B (1 + gamma_R)),
//   risky  1 / ((N - N_B)(1 + gamma_R)).
// The first overload puts the bond class on the given index set; the second
// assumes the first n_bonds assets are the bond class.
RiskBudget budget_weights(double gamma_R, const std::vector<int>& bond_group, int n_total);
RiskBudget budget_weights(double gamma_R, int n_bonds, int n_total);

// w_B = gamma / (1 + gamma), w_S = 1 - w_B.
std::pair<double, double> target_group_weights(double gamma_target);

// Receding-horizon MV program over pi_{t+1..t+H}:
//   min sum_s [ gamma pi'Sigma_s pi - r_s'pi + eta ||pi_s - pi_{s-1}||_1 ]
// under simplex, long-only, turnover, freeze and target rows.
QuadraticProgram build_mv_horizon_program(const ForecastSet& forecasts,
                                          const Eigen::VectorXd& pi_t, double gamma,
                                          const TradingConstraints& constraints, int H);

std::vector<Eigen::VectorXd> solve_mv_horizon(const ForecastSet& forecasts,
                                              const Eigen::VectorXd& pi_t, double gamma,
                                              const TradingConstraints& constraints, int H,
                                              double feas_tol = 1e-8, double opt_tol = 1e-8);

struct RiskContributions {
    Eigen::VectorXd mrb;  // normalized Euler contributions, sums to 1
    Eigen::VectorXd d;    // mrb - b
};

RiskContributions risk_budget_deviation(const Eigen::VectorXd& pi, const Eigen::MatrixXd& sigma,
                                        const RiskBudget& budget);

struct MrbLinearization {
    Eigen::MatrixXd A;  // rows are grad d_i(pi_k)
    Eigen::MatrixXd Q;  // 2 A'A + kappa I
    Eigen::VectorXd q;  // 2 A'd - Q pi_k
};

MrbLinearization mrb_linearization(const Eigen::VectorXd& pi_k, const Eigen::MatrixXd& sigma,
                                   const RiskBudget& budget, double kappa);

struct ScaOptions {
    double rho_0 = 0.6;
    double xi = 0.5;
    double kappa = 0.5;
    double tol = 0.01;
    int max_sca_iter = 50;
    double feas_tol = 1e-8;
    double opt_tol = 1e-8;
};

struct ScaResult {
    std::vector<Eigen::VectorXd> plan;      // pi_{t+1..t+H}
    int iterations = 0;
    bool converged = false;                 // false when the iteration cap hit
    std::vector<double> objective_history;  // true objective at accepted iterates
};

// Linearize-solve-blend recursion with shrinking step rho^{k+1} = rho^k (1 - xi rho^k),
// stopping when the true-objective improvement of the QP candidate drops to tol.
ScaResult solve_mrb_sca(const ForecastSet& forecasts, const Eigen::VectorXd& pi_t, double phi,
                        const RiskBudget& budget, const TradingConstraints& constraints, int H,
                        const ScaOptions& opts = {});

}  // namespace robo
