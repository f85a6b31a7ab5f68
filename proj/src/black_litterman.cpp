#include "robo/black_litterman.hpp"

#include <cmath>
#include <stdexcept>

#include "robo/linalg.hpp"

namespace robo {

Eigen::VectorXd prior_mean(double lambda_bar, const Eigen::MatrixXd& sigma,
                           const Eigen::VectorXd& w) {
    if (sigma.rows() != sigma.cols() || sigma.rows() != w.size())
        throw std::runtime_error("prior_mean: dimension mismatch");
    return 2.0 * lambda_bar * (sigma * w);
}

Views absolute_views(const Eigen::VectorXd& mixture_mu) {
    Views views;
    views.v = mixture_mu;
    views.pick = Eigen::MatrixXd::Identity(mixture_mu.size(), mixture_mu.size());
    return views;
}

PosteriorLeg posterior_leg(const Eigen::VectorXd& prior_mu, const Eigen::VectorXd& views,
                           const Eigen::MatrixXd& pick, double iota, double alpha,
                           const Eigen::MatrixXd& sigma) {
    if (iota < 0.0) throw std::runtime_error("posterior_leg: iota must be >= 0");
    if (!(alpha >= 0.0)) throw std::runtime_error("posterior_leg: alpha must be >= 0 or +inf");

    PosteriorLeg leg;
    if (iota == 0.0) {  // no prior uncertainty: views carry no weight
        leg.mean = prior_mu;
        leg.cov = sigma;
        return leg;
    }
    if (std::isinf(alpha)) {  // no confidence in views
        leg.mean = prior_mu;
        leg.cov = (1.0 + iota) * sigma;
        return leg;
    }

    const Eigen::Index k = pick.rows();
    if (pick.cols() != sigma.rows() || views.size() != k)
        throw std::runtime_error("posterior_leg: pick/view dimension mismatch");

    Eigen::MatrixXd sp = sigma * pick.transpose();       // N x K
    Eigen::MatrixXd psp = symmetrize(pick * sp);         // K x K
    Eigen::LLT<Eigen::MatrixXd> llt(psp);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("numerical error: P Sigma P' is singular");

    const double ratio = iota / (iota + alpha);
    Eigen::VectorXd innovation = views - pick * prior_mu;
    leg.mean = prior_mu + ratio * (sp * llt.solve(innovation));
    leg.cov = symmetrize((1.0 + iota) * sigma -
                         (iota * iota / (iota + alpha)) * (sp * llt.solve(sp.transpose())));
    return leg;
}

PosteriorLeg mix_posteriors(double q, const PosteriorLeg& leg_n, const PosteriorLeg& leg_c) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::runtime_error("mix_posteriors: q out of [0,1]");
    PosteriorLeg mixed;
    mixed.mean = q * leg_n.mean + (1.0 - q) * leg_c.mean;
    Eigen::MatrixXd mm = mixed.mean * mixed.mean.transpose();
    mixed.cov = q * leg_n.cov + (1.0 - q) * leg_c.cov +
                q * (leg_n.mean * leg_n.mean.transpose() - mm) +
                (1.0 - q) * (leg_c.mean * leg_c.mean.transpose() - mm);
    mixed.cov = clip_psd(mixed.cov, 0.0);
    return mixed;
}

ForecastSet build_forecast_set(const HmmParams& params, double q_t,
                               const Eigen::VectorXd& w_t, const BlConfig& cfg, int H,
                               int days_per_period) {
    if (H < 1) throw std::runtime_error("build_forecast_set: H must be >= 1");
    if (days_per_period < 1)
        throw std::runtime_error("build_forecast_set: days_per_period must be >= 1");

    const int days = H * days_per_period;
    RegimePath path = propagate_regime_probability(q_t, params.p_nn, params.p_cc, days - 1);
    MixtureMoments daily = mixture_moments(params, path);

    const Eigen::Index n = params.mu_n.size();
    ForecastSet out;
    out.horizon = H;
    out.r_hat.reserve(static_cast<size_t>(H));
    out.sigma_hat.reserve(static_cast<size_t>(H));

    for (int p = 0; p < H; ++p) {
        Eigen::VectorXd mu_p = Eigen::VectorXd::Zero(n);
        Eigen::MatrixXd sigma_p = Eigen::MatrixXd::Zero(n, n);
        double q_p = 0.0;
        for (int j = 0; j < days_per_period; ++j) {
            const size_t d = static_cast<size_t>(p * days_per_period + j);
            mu_p += daily.mu[d];
            sigma_p += daily.sigma[d];
            q_p += path.q[d];
        }
        q_p /= static_cast<double>(days_per_period);
        if (!(q_p >= 0.0 && q_p <= 1.0))
            throw std::logic_error("build_forecast_set: propagated q left [0,1]");

        Eigen::VectorXd prior_n = prior_mean(cfg.lambda_bar_n(), sigma_p, w_t);
        Eigen::VectorXd prior_c = prior_mean(cfg.lambda_bar_c(), sigma_p, w_t);
        Views views = absolute_views(mu_p);
        const Eigen::MatrixXd& pick_n = cfg.pick_n.size() > 0 ? cfg.pick_n : views.pick;
        const Eigen::MatrixXd& pick_c = cfg.pick_c.size() > 0 ? cfg.pick_c : views.pick;
        // Custom pick matrices see the absolute views through their own lens;
        // with the identity pick this is views.v itself.
        PosteriorLeg leg_n =
            posterior_leg(prior_n, pick_n * mu_p, pick_n, cfg.iota_n, cfg.alpha_n, sigma_p);
        PosteriorLeg leg_c =
            posterior_leg(prior_c, pick_c * mu_p, pick_c, cfg.iota_c, cfg.alpha_c, sigma_p);
        PosteriorLeg mixed = mix_posteriors(q_p, leg_n, leg_c);

        out.r_hat.push_back(std::move(mixed.mean));
        out.sigma_hat.push_back(std::move(mixed.cov));
    }
    return out;
}

}  // namespace robo
