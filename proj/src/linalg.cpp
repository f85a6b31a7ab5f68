#include "robo/linalg.hpp"

namespace robo {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd clip_psd(const Eigen::MatrixXd& m, double floor) {
    Eigen::MatrixXd s = symmetrize(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() >= floor) {
        return s;
    }
    ev = ev.cwiseMax(floor);
    return symmetrize(es.eigenvectors() * ev.asDiagonal() *
                      es.eigenvectors().transpose());
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m));
    return es.eigenvalues().minCoeff();
}

}  // namespace robo
