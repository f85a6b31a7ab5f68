#include "robo/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "robo/linalg.hpp"

namespace robo {

namespace {

constexpr double kCovFloor = 1e-10;
constexpr double kLog2Pi = 1.8378770664093453;

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in [-1, 1), deterministic across platforms.
double seeded_unit(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * (1.0 / 9007199254740992.0) * 2.0 - 1.0;
}

struct GaussianDensity {
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::VectorXd mean;
    double log_norm_const = 0.0;

    GaussianDensity(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) : mean(mu) {
        llt.compute(sigma);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("numerical error: emission covariance not positive definite");
        double log_det = 0.0;
        const auto& L = llt.matrixLLT();
        for (Eigen::Index i = 0; i < L.rows(); ++i) log_det += 2.0 * std::log(L(i, i));
        log_norm_const = -0.5 * (static_cast<double>(mu.size()) * kLog2Pi + log_det);
    }

    // Log-density of every row of x.
    Eigen::VectorXd log_pdf_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
        Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
        Eigen::MatrixXd solved = llt.matrixL().solve(centered.transpose());
        Eigen::VectorXd quad = solved.colwise().squaredNorm();
        return (-0.5 * quad).array() + log_norm_const;
    }
};

struct EmState {
    Eigen::VectorXd mu[2];
    Eigen::MatrixXd sigma[2];
    double trans[2][2];  // trans[i][j] = P(j | i), state 0 = n, 1 = c
    double init[2];
};

}  // namespace

double stationary_normal_probability(double p_nn, double p_cc) {
    const double denom = (1.0 - p_nn) + (1.0 - p_cc);
    if (denom <= 1e-15) return 0.5;  // both states absorbing
    return (1.0 - p_cc) / denom;
}

HmmParams fit_hmm(const Eigen::Ref<const Eigen::MatrixXd>& window, std::uint64_t seed,
                  int max_iter, double ll_tol) {
    const Eigen::Index T = window.rows();
    const Eigen::Index N = window.cols();
    if (N < 1) throw std::runtime_error("insufficient data: empty window");
    if (T < 10 * N)
        throw std::runtime_error("insufficient data: HMM window needs at least " +
                                 std::to_string(10 * N) + " rows, got " + std::to_string(T));
    if (!window.allFinite()) throw std::runtime_error("numerical error: non-finite values in window");
    if (max_iter < 1) throw std::runtime_error("max_iter must be >= 1");

    // Deterministic start: split rows at the median cross-sectional mean; the
    // high half seeds state n, the low half state c.
    Eigen::VectorXd row_means = window.rowwise().mean();
    std::vector<double> sorted(row_means.data(), row_means.data() + T);
    std::nth_element(sorted.begin(), sorted.begin() + T / 2, sorted.end());
    const double median = sorted[static_cast<size_t>(T / 2)];

    EmState st;
    for (int s = 0; s < 2; ++s) {
        st.mu[s] = Eigen::VectorXd::Zero(N);
        st.sigma[s] = Eigen::MatrixXd::Zero(N, N);
    }
    double count[2] = {0.0, 0.0};
    for (Eigen::Index t = 0; t < T; ++t) {
        const int s = row_means(t) >= median ? 0 : 1;
        st.mu[s] += window.row(t).transpose();
        count[s] += 1.0;
    }
    for (int s = 0; s < 2; ++s) {
        if (count[s] < 2.0) {
            // Degenerate split (near-constant data): share the global moments.
            st.mu[s] = window.colwise().mean().transpose();
            count[s] = static_cast<double>(T);
        } else {
            st.mu[s] /= count[s];
        }
    }
    for (Eigen::Index t = 0; t < T; ++t) {
        const int s = row_means(t) >= median ? 0 : 1;
        Eigen::VectorXd d = window.row(t).transpose() - st.mu[s];
        st.sigma[s] += d * d.transpose();
    }
    for (int s = 0; s < 2; ++s) st.sigma[s] = clip_psd(st.sigma[s] / count[s], kCovFloor);

    std::uint64_t rng = seed ^ 0x6a09e667f3bcc908ULL;
    const double jitter_scale = 1e-12;
    for (int s = 0; s < 2; ++s)
        for (Eigen::Index i = 0; i < N; ++i)
            st.mu[s](i) += jitter_scale * seeded_unit(rng) * (1.0 + std::abs(st.mu[s](i)));

    st.trans[0][0] = 0.95; st.trans[0][1] = 0.05;
    st.trans[1][0] = 0.05; st.trans[1][1] = 0.95;
    st.init[0] = 0.5; st.init[1] = 0.5;

    std::vector<double> ll_history;
    ll_history.reserve(static_cast<size_t>(max_iter));
    double prev_ll = -std::numeric_limits<double>::infinity();

    Eigen::MatrixXd log_b(T, 2);
    Eigen::MatrixXd alpha(T, 2), beta(T, 2), gamma(T, 2);
    Eigen::VectorXd scale(T);

    for (int iter = 0; iter < max_iter; ++iter) {
        GaussianDensity g0(st.mu[0], st.sigma[0]);
        GaussianDensity g1(st.mu[1], st.sigma[1]);
        log_b.col(0) = g0.log_pdf_rows(window);
        log_b.col(1) = g1.log_pdf_rows(window);
        // Per-row shift keeps the scaled recursions in a safe range.
        Eigen::VectorXd shift = log_b.rowwise().maxCoeff();
        Eigen::MatrixXd b = (log_b.colwise() - shift).array().exp();

        // Scaled forward pass.
        double ll = 0.0;
        alpha(0, 0) = st.init[0] * b(0, 0);
        alpha(0, 1) = st.init[1] * b(0, 1);
        double c0 = alpha.row(0).sum();
        if (!(c0 > 0.0) || !std::isfinite(c0))
            throw std::runtime_error("numerical error: EM forward pass underflow");
        alpha.row(0) /= c0;
        ll += std::log(c0) + shift(0);
        for (Eigen::Index t = 1; t < T; ++t) {
            for (int j = 0; j < 2; ++j)
                alpha(t, j) = (alpha(t - 1, 0) * st.trans[0][j] +
                               alpha(t - 1, 1) * st.trans[1][j]) * b(t, j);
            const double c = alpha.row(t).sum();
            if (!(c > 0.0) || !std::isfinite(c))
                throw std::runtime_error("numerical error: EM forward pass underflow");
            alpha.row(t) /= c;
            scale(t) = c;
            ll += std::log(c) + shift(t);
        }
        scale(0) = c0;
        if (!std::isfinite(ll)) throw std::runtime_error("numerical error: EM log-likelihood diverged");
        ll_history.push_back(ll);

        // Backward pass with the same scaling.
        beta.row(T - 1).setOnes();
        for (Eigen::Index t = T - 2; t >= 0; --t) {
            for (int i = 0; i < 2; ++i)
                beta(t, i) = (st.trans[i][0] * b(t + 1, 0) * beta(t + 1, 0) +
                              st.trans[i][1] * b(t + 1, 1) * beta(t + 1, 1)) / scale(t + 1);
        }

        gamma = alpha.cwiseProduct(beta);
        for (Eigen::Index t = 0; t < T; ++t) {
            const double s = gamma.row(t).sum();
            gamma.row(t) /= s;
        }

        // Transition counts.
        double xi_sum[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
        for (Eigen::Index t = 0; t + 1 < T; ++t) {
            double denom = 0.0;
            double xi[2][2];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    xi[i][j] = alpha(t, i) * st.trans[i][j] * b(t + 1, j) * beta(t + 1, j);
                    denom += xi[i][j];
                }
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) xi_sum[i][j] += xi[i][j] / denom;
        }

        // M-step.
        for (int i = 0; i < 2; ++i) {
            const double row_sum = xi_sum[i][0] + xi_sum[i][1];
            if (row_sum > 0.0) {
                st.trans[i][0] = xi_sum[i][0] / row_sum;
                st.trans[i][1] = xi_sum[i][1] / row_sum;
            }
        }
        st.init[0] = gamma(0, 0);
        st.init[1] = gamma(0, 1);
        for (int s = 0; s < 2; ++s) {
            const double w_sum = gamma.col(s).sum();
            if (w_sum < 1e-10)
                throw std::runtime_error("numerical error: EM state collapsed to zero weight");
            st.mu[s] = (window.transpose() * gamma.col(s)) / w_sum;
            Eigen::MatrixXd centered = window.rowwise() - st.mu[s].transpose();
            Eigen::MatrixXd cov =
                centered.transpose() * gamma.col(s).asDiagonal() * centered / w_sum;
            st.sigma[s] = clip_psd(cov, kCovFloor);
        }

        if (iter > 0 && ll - prev_ll < ll_tol) break;
        prev_ll = ll;
    }

    // Label the state with the larger mean level as n.
    int n_idx = st.mu[0].mean() >= st.mu[1].mean() ? 0 : 1;
    int c_idx = 1 - n_idx;

    HmmParams params;
    params.mu_n = st.mu[n_idx];
    params.mu_c = st.mu[c_idx];
    params.sigma_n = st.sigma[n_idx];
    params.sigma_c = st.sigma[c_idx];
    params.p_nn = st.trans[n_idx][n_idx];
    params.p_cc = st.trans[c_idx][c_idx];
    params.ll_history = std::move(ll_history);
    return params;
}

double filter_normal_probability(const HmmParams& params,
                                 const Eigen::Ref<const Eigen::MatrixXd>& window) {
    if (window.rows() < 1) throw std::runtime_error("insufficient data: empty filter window");
    GaussianDensity gn(params.mu_n, clip_psd(params.sigma_n));
    GaussianDensity gc(params.mu_c, clip_psd(params.sigma_c));
    Eigen::VectorXd ln = gn.log_pdf_rows(window);
    Eigen::VectorXd lc = gc.log_pdf_rows(window);

    double q = stationary_normal_probability(params.p_nn, params.p_cc);
    for (Eigen::Index t = 0; t < window.rows(); ++t) {
        const double pred_n = t == 0 ? q : q * params.p_nn + (1.0 - q) * (1.0 - params.p_cc);
        const double pred_c = 1.0 - pred_n;
        const double m = std::max(ln(t), lc(t));
        const double wn = pred_n * std::exp(ln(t) - m);
        const double wc = pred_c * std::exp(lc(t) - m);
        const double s = wn + wc;
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::runtime_error("numerical error: filter underflow");
        q = wn / s;
    }
    return q;
}

RegimePath propagate_regime_probability(double q_t, double p_nn, double p_cc, int steps) {
    auto check = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::runtime_error(std::string("probability out of range: ") + name);
    };
    check(q_t, "q_t");
    check(p_nn, "p_nn");
    check(p_cc, "p_cc");
    if (steps < 0) throw std::runtime_error("steps must be >= 0");
    RegimePath path;
    path.q.reserve(static_cast<size_t>(steps) + 1);
    path.q.push_back(q_t);
    double q = q_t;
    for (int k = 0; k < steps; ++k) {
        q = q * p_nn + (1.0 - q) * (1.0 - p_cc);
        path.q.push_back(q);
    }
    return path;
}

MixtureMoments mixture_moments(const HmmParams& params, const RegimePath& path) {
    MixtureMoments mm;
    mm.mu.reserve(path.q.size());
    mm.sigma.reserve(path.q.size());
    for (double q : path.q) {
        Eigen::VectorXd mu = q * params.mu_n + (1.0 - q) * params.mu_c;
        Eigen::MatrixXd mumu = mu * mu.transpose();
        Eigen::MatrixXd sigma =
            q * params.sigma_n + (1.0 - q) * params.sigma_c +
            q * (params.mu_n * params.mu_n.transpose() - mumu) +
            (1.0 - q) * (params.mu_c * params.mu_c.transpose() - mumu);
        mm.mu.push_back(std::move(mu));
        mm.sigma.push_back(clip_psd(sigma, 0.0));
    }
    return mm;
}

}  // namespace robo
