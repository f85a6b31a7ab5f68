#include "robo/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robo/linalg.hpp"

namespace robo {

namespace {

struct Residuals {
    double eq = 0.0;    // |A x - b|_inf
    double ineq = 0.0;  // max(G x - h, 0)_inf
    double dual = 0.0;  // |Q x + c + A'y + G'z|_inf
    double comp = 0.0;  // |s .* z|_inf

    double primal() const { return std::max(eq, ineq); }
    double max_all() const { return std::max({eq, ineq, dual, comp}); }
};

Residuals compute_residuals(const QuadraticProgram& qp, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                            const Eigen::VectorXd& s) {
    Residuals r;
    Eigen::VectorXd rd = qp.Q * x + qp.c;
    if (qp.A_eq.rows() > 0) {
        rd += qp.A_eq.transpose() * y;
        r.eq = (qp.A_eq * x - qp.b_eq).cwiseAbs().maxCoeff();
    }
    if (qp.G_in.rows() > 0) {
        rd += qp.G_in.transpose() * z;
        r.ineq = (qp.G_in * x - qp.h_in).cwiseMax(0.0).maxCoeff();
        r.comp = s.cwiseProduct(z).cwiseAbs().maxCoeff();
    }
    r.dual = rd.cwiseAbs().maxCoeff();
    return r;
}

void validate(const QuadraticProgram& qp) {
    const Eigen::Index n = qp.c.size();
    if (qp.Q.rows() != n || qp.Q.cols() != n)
        throw std::runtime_error("solve_qp: Q dimension mismatch");
    if ((qp.Q - qp.Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + qp.Q.cwiseAbs().maxCoeff()))
        throw std::runtime_error("solve_qp: Q is not symmetric");
    if (qp.A_eq.rows() != qp.b_eq.size() || (qp.A_eq.rows() > 0 && qp.A_eq.cols() != n))
        throw std::runtime_error("solve_qp: equality system dimension mismatch");
    if (qp.G_in.rows() != qp.h_in.size() || (qp.G_in.rows() > 0 && qp.G_in.cols() != n))
        throw std::runtime_error("solve_qp: inequality system dimension mismatch");
    if (!qp.Q.allFinite() || !qp.c.allFinite() || !qp.A_eq.allFinite() ||
        !qp.b_eq.allFinite() || !qp.G_in.allFinite() || !qp.h_in.allFinite())
        throw std::runtime_error("solve_qp: non-finite problem data");
}

// Solves the equality-constrained KKT system
//   [Q + reg  A'] [x]   [-c]
//   [A     -reg ] [y] = [ b]
// via LDLT on the full symmetric matrix.
bool solve_kkt(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
               const Eigen::VectorXd& b, double reg, Eigen::VectorXd& x, Eigen::VectorXd& y) {
    const Eigen::Index n = c.size();
    const Eigen::Index m = b.size();
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = Q + reg * Eigen::MatrixXd::Identity(n, n);
    if (m > 0) {
        kkt.topRightCorner(n, m) = A.transpose();
        kkt.bottomLeftCorner(m, n) = A;
        kkt.bottomRightCorner(m, m) = -reg * Eigen::MatrixXd::Identity(m, m);
    }
    Eigen::VectorXd rhs(n + m);
    rhs.head(n) = -c;
    rhs.tail(m) = b;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
    Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite()) return false;
    // One step of iterative refinement.
    Eigen::VectorXd resid = rhs - kkt * sol;
    sol += lu.solve(resid);
    if (!sol.allFinite()) return false;
    x = sol.head(n);
    y = sol.tail(m);
    return true;
}

// Attempts to recover a high-accuracy solution by solving the KKT system of
// the guessed active set. Returns true when the polished point satisfies the
// tolerances and does not degrade the incumbent.
bool polish(const QuadraticProgram& qp, double feas_tol, double opt_tol, QpSolution& sol,
            const Eigen::VectorXd& z, const Eigen::VectorXd& s) {
    const Eigen::Index n = qp.num_vars();
    const Eigen::Index me = qp.A_eq.rows();
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < qp.G_in.rows(); ++i)
        if (z(i) > s(i)) active.push_back(i);

    const Eigen::Index ma = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd A(me + ma, n);
    Eigen::VectorXd b(me + ma);
    if (me > 0) {
        A.topRows(me) = qp.A_eq;
        b.head(me) = qp.b_eq;
    }
    for (Eigen::Index k = 0; k < ma; ++k) {
        A.row(me + k) = qp.G_in.row(active[static_cast<size_t>(k)]);
        b(me + k) = qp.h_in(active[static_cast<size_t>(k)]);
    }

    const double reg = 1e-12 * (1.0 + qp.Q.cwiseAbs().maxCoeff());
    Eigen::VectorXd xp, yp;
    if (!solve_kkt(qp.Q, qp.c, A, b, reg, xp, yp)) return false;

    Eigen::VectorXd zp = Eigen::VectorXd::Zero(qp.G_in.rows());
    for (Eigen::Index k = 0; k < ma; ++k) zp(active[static_cast<size_t>(k)]) = yp(me + k);
    if (ma > 0 && zp.minCoeff() < -opt_tol) return false;  // wrong active-set guess
    zp = zp.cwiseMax(0.0);
    Eigen::VectorXd sp = qp.G_in.rows() > 0 ? (qp.h_in - qp.G_in * xp).eval() : Eigen::VectorXd();

    Residuals r = compute_residuals(qp, xp, yp.head(me), zp, sp.cwiseMax(0.0));
    // Complementarity of inactive rows is exact (z = 0); active rows have
    // s = 0 up to the KKT solve accuracy.
    if (r.primal() <= feas_tol && r.dual <= opt_tol && r.max_all() <= sol.kkt_residual + opt_tol) {
        sol.x = xp;
        sol.kkt_residual = r.max_all();
        return true;
    }
    return false;
}

}  // namespace

QpSolution solve_qp(const QuadraticProgram& qp, double feas_tol, double opt_tol, int max_iter) {
    validate(qp);
    const Eigen::Index n = qp.num_vars();
    const Eigen::Index me = qp.A_eq.rows();
    const Eigen::Index mi = qp.G_in.rows();

    QpSolution sol;
    sol.x = Eigen::VectorXd::Zero(n);

    const double q_scale = 1.0 + qp.Q.cwiseAbs().maxCoeff();
    const double static_reg = 1e-12 * q_scale;

    // Consistency of the equality system; an inconsistent system is an
    // infeasibility certificate independent of the inequalities.
    if (me > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(qp.A_eq);
        Eigen::VectorXd x_ls = qr.solve(qp.b_eq);
        const double resid = (qp.A_eq * x_ls - qp.b_eq).cwiseAbs().maxCoeff();
        if (resid > 1e-7 * (1.0 + qp.b_eq.cwiseAbs().maxCoeff())) {
            sol.status = QpStatus::Infeasible;
            sol.kkt_residual = resid;
            return sol;
        }
    }

    // Pure equality-constrained (or unconstrained) QP: one KKT solve.
    if (mi == 0) {
        Eigen::VectorXd x, y;
        if (!solve_kkt(qp.Q, qp.c, qp.A_eq, qp.b_eq, static_reg, x, y)) {
            sol.status = QpStatus::MaxIter;
            return sol;
        }
        sol.x = x;
        sol.iterations = 1;
        Residuals r = compute_residuals(qp, x, y, Eigen::VectorXd(), Eigen::VectorXd());
        sol.kkt_residual = r.max_all();
        sol.objective = 0.5 * x.dot(qp.Q * x) + qp.c.dot(x);
        sol.status = (r.eq <= feas_tol && r.dual <= opt_tol) ? QpStatus::Optimal
                                                             : QpStatus::MaxIter;
        return sol;
    }

    // Starting point: equality-feasible minimizer of a regularized objective,
    // slacks shifted into the positive orthant.
    Eigen::VectorXd x(n), y0;
    {
        Eigen::MatrixXd Q0 = qp.Q + Eigen::MatrixXd::Identity(n, n);
        if (!solve_kkt(Q0, qp.c, qp.A_eq, qp.b_eq, static_reg, x, y0)) x.setZero();
    }
    Eigen::VectorXd y = me > 0 ? y0 : Eigen::VectorXd();
    Eigen::VectorXd s_raw = qp.h_in - qp.G_in * x;
    const double shift = std::max(0.0, -1.5 * s_raw.minCoeff()) + 1.0;
    Eigen::VectorXd s = s_raw.array() + shift;
    Eigen::VectorXd z = Eigen::VectorXd::Ones(mi);

    const int iter_cap = std::min(max_iter, 200);
    int consecutive_stalls = 0;
    QpStatus final_status = QpStatus::MaxIter;

    for (int iter = 0; iter < iter_cap; ++iter) {
        sol.iterations = iter + 1;
        Residuals res = compute_residuals(qp, x, y, z, s);
        const double mu = s.dot(z) / static_cast<double>(mi);

        if (res.primal() <= feas_tol && res.dual <= opt_tol &&
            mu <= std::max(opt_tol * 1e-2, 1e-14)) {
            final_status = QpStatus::Optimal;
            break;
        }
        // Divergence of the duals with a stubborn primal residual certifies
        // infeasibility for all practical purposes.
        const double dual_norm = std::max(z.lpNorm<Eigen::Infinity>(),
                                          me > 0 ? y.lpNorm<Eigen::Infinity>() : 0.0);
        if (dual_norm > 1e10 && res.primal() > feas_tol) {
            final_status = QpStatus::Infeasible;
            break;
        }
        if (consecutive_stalls >= 20) {
            final_status = res.primal() > 10.0 * feas_tol ? QpStatus::Infeasible
                                                          : QpStatus::MaxIter;
            break;
        }

        // Residual vectors for the Newton systems.
        Eigen::VectorXd rd = qp.Q * x + qp.c + qp.G_in.transpose() * z;
        if (me > 0) rd += qp.A_eq.transpose() * y;
        Eigen::VectorXd rp_eq = me > 0 ? (qp.A_eq * x - qp.b_eq).eval() : Eigen::VectorXd();
        Eigen::VectorXd rp_in = qp.G_in * x + s - qp.h_in;

        Eigen::VectorXd w = z.cwiseQuotient(s);  // diag weights of G'WG
        Eigen::MatrixXd M = qp.Q + static_reg * Eigen::MatrixXd::Identity(n, n) +
                            qp.G_in.transpose() * w.asDiagonal() * qp.G_in;
        Eigen::LLT<Eigen::MatrixXd> mllt(M);
        if (mllt.info() != Eigen::Success) {
            M += 1e-8 * q_scale * Eigen::MatrixXd::Identity(n, n);
            mllt.compute(M);
            if (mllt.info() != Eigen::Success) break;
        }

        Eigen::MatrixXd MinvAt;
        Eigen::LDLT<Eigen::MatrixXd> schur;
        if (me > 0) {
            MinvAt = mllt.solve(qp.A_eq.transpose());
            Eigen::MatrixXd S = qp.A_eq * MinvAt;
            S.diagonal().array() += static_reg;
            schur.compute(S);
        }

        // Newton direction for given complementarity right-hand side rc:
        //   S dz + Z ds = -rc,  G dx + ds = -rp_in  =>  reduced system in dx.
        auto newton = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                          Eigen::VectorXd& dz, Eigen::VectorXd& ds) {
            Eigen::VectorXd tmp = w.cwiseProduct(rp_in) - rc.cwiseQuotient(s);
            Eigen::VectorXd rhs = -rd - qp.G_in.transpose() * tmp;
            if (me > 0) {
                Eigen::VectorXd Minv_rhs = mllt.solve(rhs);
                dy = schur.solve(qp.A_eq * Minv_rhs + rp_eq);
                dx = Minv_rhs - MinvAt * dy;
            } else {
                dx = mllt.solve(rhs);
                dy.resize(0);
            }
            ds = -rp_in - qp.G_in * dx;
            dz = -(rc + z.cwiseProduct(ds)).cwiseQuotient(s);
        };

        auto step_len = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
            double a = 1.0;
            for (Eigen::Index i = 0; i < v.size(); ++i)
                if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
            return a;
        };

        // Predictor.
        Eigen::VectorXd rc_aff = s.cwiseProduct(z);
        Eigen::VectorXd dx_a, dy_a, dz_a, ds_a;
        newton(rc_aff, dx_a, dy_a, dz_a, ds_a);
        const double a_pri = step_len(s, ds_a);
        const double a_dua = step_len(z, dz_a);
        const double mu_aff =
            (s + std::min(a_pri, a_dua) * ds_a).dot(z + std::min(a_pri, a_dua) * dz_a) /
            static_cast<double>(mi);
        const double sigma = std::pow(std::max(mu_aff, 0.0) / std::max(mu, 1e-300), 3.0);

        // Corrector with centering.
        Eigen::VectorXd rc = rc_aff + ds_a.cwiseProduct(dz_a) -
                             Eigen::VectorXd::Constant(mi, sigma * mu);
        Eigen::VectorXd dx, dy, dz, ds;
        newton(rc, dx, dy, dz, ds);

        const double tau = 0.995;
        const double alpha_p = std::min(1.0, tau * step_len(s, ds));
        const double alpha_d = std::min(1.0, tau * step_len(z, dz));
        const double alpha = std::min(alpha_p, alpha_d);
        if (!std::isfinite(alpha) || alpha < 1e-12) {
            ++consecutive_stalls;
            continue;
        }
        consecutive_stalls = alpha < 1e-7 ? consecutive_stalls + 1 : 0;

        x += alpha * dx;
        if (me > 0) y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
    }

    sol.x = x;
    sol.status = final_status;
    Residuals r = compute_residuals(qp, x, y, z, s);
    sol.kkt_residual = r.max_all();

    if (final_status == QpStatus::Optimal || final_status == QpStatus::MaxIter) {
        if (polish(qp, feas_tol, opt_tol, sol, z, s)) {
            final_status = QpStatus::Optimal;
            sol.status = QpStatus::Optimal;
        }
    }
    if (sol.status == QpStatus::MaxIter && r.primal() <= feas_tol && r.dual <= opt_tol &&
        r.comp <= std::sqrt(opt_tol)) {
        sol.status = QpStatus::Optimal;  // converged without the polish step
    }
    sol.objective = 0.5 * sol.x.dot(qp.Q * sol.x) + qp.c.dot(sol.x);
    return sol;
}

}  // namespace robo
