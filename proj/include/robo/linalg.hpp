#pragma once

#include <Eigen/Dense>

namespace robo {

// Shared matrix hygiene used by the forecasting and optimization layers.
// Covariances coming out of estimators are symmetrized and eigenvalue-clipped
// before they touch any solver.

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

// Symmetrize, then clip eigenvalues below `floor` (default 1e-10).
Eigen::MatrixXd clip_psd(const Eigen::MatrixXd& m, double floor = 1e-10);

double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace robo
