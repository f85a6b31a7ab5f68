#include "robo/allocation.hpp"

#include <cmath>
#include <stdexcept>

namespace robo {

namespace {

bool needs_split_vars(const TradingConstraints& c) {
    return c.tc_eta > 0.0 || std::isfinite(c.turnover_delta);
}

void validate_constraints(const TradingConstraints& c) {
    if (!(c.turnover_delta > 0.0))
        throw std::runtime_error("turnover_delta must be positive (use +inf to disable)");
    if (c.tc_eta < 0.0) throw std::runtime_error("tc_eta must be >= 0");
    if (!c.budget) throw std::runtime_error("the budget constraint is structural and required");
}

// Assembles the horizon QP shared by both criteria. step_Q[s]/step_c[s] give
// the per-step quadratic/linear cost of the pi block; split variables carry
// the eta L1 cost and the turnover rows.
QuadraticProgram build_horizon_program(const std::vector<Eigen::MatrixXd>& step_Q,
                                       const std::vector<Eigen::VectorXd>& step_c,
                                       const Eigen::VectorXd& pi_t,
                                       const TradingConstraints& constraints, int H) {
    const Eigen::Index N = pi_t.size();
    const bool with_z = needs_split_vars(constraints);
    const Eigen::Index n_pi = static_cast<Eigen::Index>(H) * N;
    const Eigen::Index n = with_z ? 3 * n_pi : n_pi;
    const Eigen::Index zp0 = n_pi;       // z+ blocks
    const Eigen::Index zm0 = 2 * n_pi;   // z- blocks

    for (int s : constraints.freeze_steps)
        if (s < 0 || s >= H) throw std::runtime_error("freeze step outside horizon");
    if (constraints.target) {
        for (int i : constraints.target->bond_group)
            if (i < 0 || i >= N) throw std::runtime_error("target bond index out of range");
    }

    QuadraticProgram qp;
    qp.Q = Eigen::MatrixXd::Zero(n, n);
    qp.c = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < H; ++s) {
        if (step_Q[static_cast<size_t>(s)].rows() != N || step_c[static_cast<size_t>(s)].size() != N)
            throw std::runtime_error("horizon program build error: step dimension mismatch");
        qp.Q.block(s * N, s * N, N, N) = step_Q[static_cast<size_t>(s)];
        qp.c.segment(s * N, N) = step_c[static_cast<size_t>(s)];
    }
    if (with_z && constraints.tc_eta > 0.0)
        qp.c.segment(zp0, 2 * n_pi).setConstant(constraints.tc_eta);

    // Equality rows: simplex per step, split definitions, freezes, target.
    Eigen::Index me = H;
    if (with_z) me += n_pi;
    me += static_cast<Eigen::Index>(constraints.freeze_steps.size()) * N;
    Eigen::Index target_rows = 0;
    if (constraints.target) {
        for (int s = std::max(0, constraints.target->active_from_step); s < H; ++s) ++target_rows;
        me += target_rows;
    }
    qp.A_eq = Eigen::MatrixXd::Zero(me, n);
    qp.b_eq = Eigen::VectorXd::Zero(me);
    Eigen::Index row = 0;
    for (int s = 0; s < H; ++s, ++row) {
        qp.A_eq.block(row, s * N, 1, N).setOnes();
        qp.b_eq(row) = 1.0;
    }
    if (with_z) {
        for (int s = 0; s < H; ++s) {
            qp.A_eq.block(row, s * N, N, N).setIdentity();
            if (s > 0) qp.A_eq.block(row, (s - 1) * N, N, N) = -Eigen::MatrixXd::Identity(N, N);
            qp.A_eq.block(row, zp0 + s * N, N, N) = -Eigen::MatrixXd::Identity(N, N);
            qp.A_eq.block(row, zm0 + s * N, N, N) = Eigen::MatrixXd::Identity(N, N);
            if (s == 0) qp.b_eq.segment(row, N) = pi_t;
            row += N;
        }
    }
    for (int s : constraints.freeze_steps) {
        qp.A_eq.block(row, s * N, N, N).setIdentity();
        if (s > 0) {
            qp.A_eq.block(row, (s - 1) * N, N, N) = -Eigen::MatrixXd::Identity(N, N);
        } else {
            qp.b_eq.segment(row, N) = pi_t;
        }
        row += N;
    }
    if (constraints.target) {
        for (int s = std::max(0, constraints.target->active_from_step); s < H; ++s, ++row) {
            for (int i : constraints.target->bond_group) qp.A_eq(row, s * N + i) = 1.0;
            qp.b_eq(row) = constraints.target->w_bond;
        }
    }

    // Inequality rows: long-only, z >= 0, per-step turnover caps.
    Eigen::Index mi = 0;
    if (constraints.long_only) mi += n_pi;
    if (with_z) mi += 2 * n_pi;
    const bool cap_turnover = std::isfinite(constraints.turnover_delta);
    if (cap_turnover) mi += H;
    qp.G_in = Eigen::MatrixXd::Zero(mi, n);
    qp.h_in = Eigen::VectorXd::Zero(mi);
    row = 0;
    if (constraints.long_only) {
        qp.G_in.block(row, 0, n_pi, n_pi) = -Eigen::MatrixXd::Identity(n_pi, n_pi);
        row += n_pi;
    }
    if (with_z) {
        qp.G_in.block(row, zp0, 2 * n_pi, 2 * n_pi) =
            -Eigen::MatrixXd::Identity(2 * n_pi, 2 * n_pi);
        row += 2 * n_pi;
    }
    if (cap_turnover) {
        for (int s = 0; s < H; ++s, ++row) {
            qp.G_in.block(row, zp0 + s * N, 1, N).setOnes();
            qp.G_in.block(row, zm0 + s * N, 1, N).setOnes();
            qp.h_in(row) = constraints.turnover_delta;
        }
    }
    return qp;
}

std::vector<Eigen::VectorXd> extract_plan(const Eigen::VectorXd& x, int H, Eigen::Index N) {
    std::vector<Eigen::VectorXd> plan;
    plan.reserve(static_cast<size_t>(H));
    for (int s = 0; s < H; ++s) plan.push_back(x.segment(s * N, N));
    return plan;
}

}  // namespace

RiskBudget budget_weights(double gamma_R, const std::vector<int>& bond_group, int n_total) {
    if (!(gamma_R > 0.0))
        throw std::runtime_error("gamma_R must be > 0 (budgets must stay strictly positive)");
    const int n_bonds = static_cast<int>(bond_group.size());
    if (n_bonds <= 0 || n_bonds >= n_total)
        throw std::runtime_error("budget_weights needs 0 < n_bonds < n_total");
    std::vector<bool> is_bond(static_cast<size_t>(n_total), false);
    for (int i : bond_group) {
        if (i < 0 || i >= n_total) throw std::runtime_error("bond index out of range");
        is_bond[static_cast<size_t>(i)] = true;
    }
    RiskBudget budget;
    budget.gamma_R = gamma_R;
    budget.bond_group = bond_group;
    budget.b.resize(n_total);
    const double b_bond = gamma_R / (n_bonds * (1.0 + gamma_R));
    const double b_risky = 1.0 / ((n_total - n_bonds) * (1.0 + gamma_R));
    for (int i = 0; i < n_total; ++i) {
        if (is_bond[static_cast<size_t>(i)]) {
            budget.b(i) = b_bond;
        } else {
            budget.b(i) = b_risky;
            budget.risky_group.push_back(i);
        }
    }
    return budget;
}

RiskBudget budget_weights(double gamma_R, int n_bonds, int n_total) {
    std::vector<int> bonds(static_cast<size_t>(std::max(n_bonds, 0)));
    for (int i = 0; i < n_bonds; ++i) bonds[static_cast<size_t>(i)] = i;
    return budget_weights(gamma_R, bonds, n_total);
}

std::pair<double, double> target_group_weights(double gamma_target) {
    if (gamma_target < 0.0) throw std::runtime_error("gamma_target must be >= 0");
    const double w_b = gamma_target / (1.0 + gamma_target);
    return {w_b, 1.0 - w_b};
}

QuadraticProgram build_mv_horizon_program(const ForecastSet& forecasts,
                                          const Eigen::VectorXd& pi_t, double gamma,
                                          const TradingConstraints& constraints, int H) {
    validate_constraints(constraints);
    if (H < 1) throw std::runtime_error("horizon must be >= 1");
    if (!(gamma > 0.0)) throw std::runtime_error("gamma must be > 0");
    if (static_cast<int>(forecasts.r_hat.size()) < H)
        throw std::runtime_error("forecast set shorter than horizon");
    const Eigen::Index N = pi_t.size();
    std::vector<Eigen::MatrixXd> step_Q;
    std::vector<Eigen::VectorXd> step_c;
    step_Q.reserve(static_cast<size_t>(H));
    step_c.reserve(static_cast<size_t>(H));
    for (int s = 0; s < H; ++s) {
        const auto& sig = forecasts.sigma_hat[static_cast<size_t>(s)];
        const auto& r = forecasts.r_hat[static_cast<size_t>(s)];
        if (sig.rows() != N || r.size() != N)
            throw std::runtime_error("forecast dimension does not match portfolio size");
        step_Q.push_back(2.0 * gamma * sig);
        step_c.push_back(-r);
    }
    return build_horizon_program(step_Q, step_c, pi_t, constraints, H);
}

std::vector<Eigen::VectorXd> solve_mv_horizon(const ForecastSet& forecasts,
                                              const Eigen::VectorXd& pi_t, double gamma,
                                              const TradingConstraints& constraints, int H,
                                              double feas_tol, double opt_tol) {
    QuadraticProgram qp = build_mv_horizon_program(forecasts, pi_t, gamma, constraints, H);
    QpSolution sol = solve_qp(qp, feas_tol, opt_tol);
    if (sol.status == QpStatus::Infeasible)
        throw InfeasibleError("MV horizon program infeasible (check turnover/target settings)");
    if (sol.status != QpStatus::Optimal)
        throw std::runtime_error("MV horizon program did not converge (kkt residual " +
                                 std::to_string(sol.kkt_residual) + ")");
    return extract_plan(sol.x, H, pi_t.size());
}

RiskContributions risk_budget_deviation(const Eigen::VectorXd& pi, const Eigen::MatrixXd& sigma,
                                        const RiskBudget& budget) {
    if (sigma.rows() != pi.size() || sigma.cols() != pi.size() || budget.b.size() != pi.size())
        throw std::runtime_error("risk_budget_deviation: dimension mismatch");
    Eigen::VectorXd u = sigma * pi;
    const double var = pi.dot(u);
    if (!(var > 0.0))
        throw std::runtime_error("degenerate risk: portfolio variance is not positive");
    RiskContributions rc;
    rc.mrb = pi.cwiseProduct(u) / var;
    rc.d = rc.mrb - budget.b;
    return rc;
}

MrbLinearization mrb_linearization(const Eigen::VectorXd& pi_k, const Eigen::MatrixXd& sigma,
                                   const RiskBudget& budget, double kappa) {
    if (!(kappa > 0.0)) throw std::runtime_error("kappa must be > 0");
    const Eigen::Index N = pi_k.size();
    Eigen::VectorXd u = sigma * pi_k;
    const double var = pi_k.dot(u);
    if (!(var > 0.0))
        throw std::runtime_error("degenerate risk: portfolio variance is not positive");
    RiskContributions rc = risk_budget_deviation(pi_k, sigma, budget);

    // grad d_i = [ var (Sigma^(i) + Sigma^(i)') pi - 2 (pi'Sigma^(i) pi) Sigma pi ] / var^2
    // with Sigma^(i) keeping only row i, so (Sigma^(i)+Sigma^(i)') pi =
    // e_i (Sigma pi)_i + pi_i Sigma.row(i)'.
    MrbLinearization lin;
    lin.A = Eigen::MatrixXd::Zero(N, N);
    const double inv_var2 = 1.0 / (var * var);
    for (Eigen::Index i = 0; i < N; ++i) {
        Eigen::VectorXd grad = var * pi_k(i) * sigma.row(i).transpose();
        grad(i) += var * u(i);
        grad -= 2.0 * (pi_k(i) * u(i)) * u;
        lin.A.row(i) = grad.transpose() * inv_var2;
    }
    lin.Q = 2.0 * lin.A.transpose() * lin.A + kappa * Eigen::MatrixXd::Identity(N, N);
    lin.q = 2.0 * lin.A.transpose() * rc.d - lin.Q * pi_k;
    return lin;
}

ScaResult solve_mrb_sca(const ForecastSet& forecasts, const Eigen::VectorXd& pi_t, double phi,
                        const RiskBudget& budget, const TradingConstraints& constraints, int H,
                        const ScaOptions& opts) {
    validate_constraints(constraints);
    if (H < 1) throw std::runtime_error("horizon must be >= 1");
    if (!(phi > 0.0)) throw std::runtime_error("phi must be > 0");
    if (!(opts.rho_0 > 0.0 && opts.rho_0 <= 1.0)) throw std::runtime_error("rho_0 must be in (0,1]");
    if (!(opts.xi >= 0.0 && opts.xi <= 1.0)) throw std::runtime_error("xi must be in [0,1]");
    if (!(opts.tol > 0.0)) throw std::runtime_error("tol must be > 0");
    if (static_cast<int>(forecasts.r_hat.size()) < H)
        throw std::runtime_error("forecast set shorter than horizon");

    const Eigen::Index N = pi_t.size();

    // True objective of the non-convex criterion, in minimization form:
    //   sum_s [ phi ||d_s(pi_s)||^2 + eta ||pi_s - pi_{s-1}||_1 - r_s'pi_s ].
    auto true_objective = [&](const std::vector<Eigen::VectorXd>& plan) {
        double f = 0.0;
        for (int s = 0; s < H; ++s) {
            const auto& pi = plan[static_cast<size_t>(s)];
            RiskContributions rc =
                risk_budget_deviation(pi, forecasts.sigma_hat[static_cast<size_t>(s)], budget);
            f += phi * rc.d.squaredNorm();
            const Eigen::VectorXd& prev = s == 0 ? pi_t : plan[static_cast<size_t>(s) - 1];
            f += constraints.tc_eta * (pi - prev).lpNorm<1>();
            f -= forecasts.r_hat[static_cast<size_t>(s)].dot(pi);
        }
        return f;
    };

    std::vector<Eigen::VectorXd> iterate(static_cast<size_t>(H), pi_t);
    double rho = opts.rho_0;

    ScaResult result;
    result.objective_history.push_back(true_objective(iterate));

    // Only QP candidates are eligible return values: the raw linearization
    // iterate may violate a target row that pi_t does not satisfy yet.
    std::vector<Eigen::VectorXd> best_plan;
    double best_f = std::numeric_limits<double>::infinity();

    for (int k = 0; k < opts.max_sca_iter; ++k) {
        result.iterations = k + 1;

        std::vector<Eigen::MatrixXd> step_Q;
        std::vector<Eigen::VectorXd> step_c;
        step_Q.reserve(static_cast<size_t>(H));
        step_c.reserve(static_cast<size_t>(H));
        for (int s = 0; s < H; ++s) {
            MrbLinearization lin =
                mrb_linearization(iterate[static_cast<size_t>(s)],
                                  forecasts.sigma_hat[static_cast<size_t>(s)], budget, opts.kappa);
            step_Q.push_back(phi * lin.Q);
            step_c.push_back(phi * lin.q - forecasts.r_hat[static_cast<size_t>(s)]);
        }
        QuadraticProgram qp = build_horizon_program(step_Q, step_c, pi_t, constraints, H);
        QpSolution sol = solve_qp(qp, opts.feas_tol, opts.opt_tol);
        if (sol.status == QpStatus::Infeasible)
            throw InfeasibleError("MRB subproblem infeasible (check turnover/target settings)");
        if (sol.status != QpStatus::Optimal)
            throw std::runtime_error("MRB subproblem did not converge (kkt residual " +
                                     std::to_string(sol.kkt_residual) + ")");
        std::vector<Eigen::VectorXd> candidate = extract_plan(sol.x, H, N);

        const double f_prev = result.objective_history.back();
        const double f_cand = true_objective(candidate);
        if (f_cand < best_f) {
            best_f = f_cand;
            best_plan = candidate;
        }
        if (f_prev - f_cand <= opts.tol) {
            result.plan = f_cand <= best_f ? std::move(candidate) : std::move(best_plan);
            result.objective_history.push_back(std::min(f_cand, best_f));
            result.converged = true;
            return result;
        }

        for (int s = 0; s < H; ++s)
            iterate[static_cast<size_t>(s)] +=
                rho * (candidate[static_cast<size_t>(s)] - iterate[static_cast<size_t>(s)]);
        result.objective_history.push_back(true_objective(iterate));
        rho = rho * (1.0 - opts.xi * rho);
    }

    result.plan = std::move(best_plan);
    result.converged = false;
    return result;
}

}  // namespace robo
