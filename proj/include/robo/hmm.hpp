#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "robo/market_data.hpp"

namespace robo {

// Two-regime Gaussian hidden Markov model of daily returns. State n (normal)
// is the regime whose fitted mean level is higher; c is the contraction
// regime. Self-transition probabilities p_nn, p_cc define
//   Lambda = [ p_nn    1-p_nn ]
//            [ 1-p_cc  p_cc   ]

struct HmmParams {
    Eigen::VectorXd mu_n, mu_c;      // per-day mean returns
    Eigen::MatrixXd sigma_n, sigma_c;  // per-day covariances, symmetric PSD
    double p_nn = 0.0, p_cc = 0.0;
    int fitted_at = -1;                // day index of the fit, -1 if unknown
    std::vector<double> ll_history;    // per-iteration log-likelihood
};

// q[k] = P(regime n on day anchored_at + k | info at anchored_at).
struct RegimePath {
    std::vector<double> q;
    int anchored_at = -1;
};

struct MixtureMoments {
    std::vector<Eigen::VectorXd> mu;
    std::vector<Eigen::MatrixXd> sigma;
};

// Baum-Welch EM with a deterministic initialization: the window is split at
// the empirical median of cross-sectional mean returns, the high half seeding
// state n and the low half state c; `seed` perturbs the initial means by a
// negligible deterministic jitter so ties break reproducibly. Log-likelihood
// is nondecreasing across iterations; covariances are eigenvalue-clipped at
// 1e-10; states are relabeled so n carries the larger mean level.
HmmParams fit_hmm(const Eigen::Ref<const Eigen::MatrixXd>& window, std::uint64_t seed,
                  int max_iter = 200, double ll_tol = 1e-6);

inline HmmParams fit_hmm(const ReturnPanel& window, std::uint64_t seed,
                         int max_iter = 200, double ll_tol = 1e-6) {
    return fit_hmm(window.values, seed, max_iter, ll_tol);
}

// Forward-filtered posterior P(regime n | window) at the last window row.
// The initial distribution is the stationary distribution of the chain.
double filter_normal_probability(const HmmParams& params,
                                 const Eigen::Ref<const Eigen::MatrixXd>& window);

// q_{tau|t} = q_{tau-1|t} p_nn + (1 - q_{tau-1|t})(1 - p_cc), anchored at q_t.
// Returns steps+1 values, the first being q_t itself.
RegimePath propagate_regime_probability(double q_t, double p_nn, double p_cc, int steps);

// Mixture mean/covariance for each entry of the path:
//   mu    = q mu_n + (1-q) mu_c
//   sigma = q S_n + (1-q) S_c + q (mu_n mu_n' - mu mu') + (1-q)(mu_c mu_c' - mu mu')
MixtureMoments mixture_moments(const HmmParams& params, const RegimePath& path);

// Stationary probability of state n for the given self-transitions.
double stationary_normal_probability(double p_nn, double p_cc);

}  // namespace robo
