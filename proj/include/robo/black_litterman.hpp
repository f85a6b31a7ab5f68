#pragma once

#include <Eigen/Dense>
#include <vector>

#include "robo/hmm.hpp"

namespace robo {

// Black-Litterman blending on top of the regime forecaster. Per-regime priors
// are 2*lambda_bar*Sigma*w (no reverse optimization); absolute views equal the
// mixture means; per-leg Gaussian posteriors are mixed by the propagated
// regime probability. The prior/view noise scales iota and alpha enter only
// through the closed-form posterior; alpha = +infinity is an explicit branch.

struct BlConfig {
    double lambda_bar_0 = 1.0;
    double lambda_mult_n = 1.2;  // lambda_bar_n = lambda_mult_n * lambda_bar_0
    double lambda_mult_c = 0.8;
    double iota_n = 0.03;
    double iota_c = 0.027;  // default 0.9 * iota_n
    double alpha_n = 1.0;   // +infinity = no confidence in views
    double alpha_c = 1.0;
    Eigen::MatrixXd pick_n;  // empty => identity (total absolute views)
    Eigen::MatrixXd pick_c;

    double lambda_bar_n() const { return lambda_mult_n * lambda_bar_0; }
    double lambda_bar_c() const { return lambda_mult_c * lambda_bar_0; }
};

// Blended posterior moments per rebalance period, anchored at day t.
struct ForecastSet {
    std::vector<Eigen::VectorXd> r_hat;
    std::vector<Eigen::MatrixXd> sigma_hat;
    int anchored_at = -1;
    int horizon = 0;
};

struct Views {
    Eigen::VectorXd v;
    Eigen::MatrixXd pick;
};

struct PosteriorLeg {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

// Deterministic part of the prior: 2 * lambda_bar * Sigma * w.
Eigen::VectorXd prior_mean(double lambda_bar, const Eigen::MatrixXd& sigma,
                           const Eigen::VectorXd& w);

// Total absolute views: K = N, pick = identity, v = mixture mean.
Views absolute_views(const Eigen::VectorXd& mixture_mu);

// Posterior of one regime leg:
//   mean = prior + iota/(iota+alpha) * S P' (P S P')^-1 (v - P prior)
//   cov  = (1+iota) S - iota^2/(iota+alpha) * S P' (P S P')^-1 P S
// iota = 0 short-circuits to (prior, S); alpha = +inf to (prior, (1+iota) S).
PosteriorLeg posterior_leg(const Eigen::VectorXd& prior_mu, const Eigen::VectorXd& views,
                           const Eigen::MatrixXd& pick, double iota, double alpha,
                           const Eigen::MatrixXd& sigma);

// Mixture of the two posteriors with weight q on the n leg.
PosteriorLeg mix_posteriors(double q, const PosteriorLeg& leg_n, const PosteriorLeg& leg_c);

// Full pipeline for one rebalance date: propagate q daily over
// H*days_per_period steps, aggregate daily mixture moments into periods by
// summation, then run prior -> views -> per-leg posterior -> mixing at the
// period scale. The mixing weight of a period is the mean of its daily q.
ForecastSet build_forecast_set(const HmmParams& params, double q_t,
                               const Eigen::VectorXd& w_t, const BlConfig& cfg, int H,
                               int days_per_period);

}  // namespace robo
