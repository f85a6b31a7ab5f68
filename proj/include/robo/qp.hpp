#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace robo {

// Convex quadratic program
//   minimize 1/2 x'Qx + c'x
//   subject to A_eq x = b_eq, G_in x <= h_in.
// The single numerical kernel both portfolio criteria compile to. L1 terms
// must be pre-compiled to linear form by the caller (variable splitting).

struct QuadraticProgram {
    Eigen::MatrixXd Q;  // symmetric PSD
    Eigen::VectorXd c;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd G_in;
    Eigen::VectorXd h_in;
    std::vector<std::string> variable_names;  // optional, diagnostics only

    Eigen::Index num_vars() const { return c.size(); }
};

enum class QpStatus { Optimal, Infeasible, MaxIter };

struct QpSolution {
    Eigen::VectorXd x;
    double objective = 0.0;
    QpStatus status = QpStatus::MaxIter;
    double kkt_residual = 0.0;  // max of primal/dual/complementarity violations
    int iterations = 0;
};

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Primal-dual interior point (Mehrotra predictor-corrector) with an
// active-set polish pass. status == Optimal guarantees
//   |A_eq x - b_eq|_inf <= feas_tol, G_in x <= h_in + feas_tol,
//   stationarity residual <= opt_tol.
// Deterministic for fixed inputs and tolerances.
QpSolution solve_qp(const QuadraticProgram& qp, double feas_tol = 1e-8,
                    double opt_tol = 1e-8, int max_iter = 50000);

}  // namespace robo
