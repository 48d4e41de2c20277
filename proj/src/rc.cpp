#include "difact/rc.hpp"

#include <cmath>

namespace difact::diffusion {

RCNetwork make_rc_network(const Eigen::MatrixXd& conductance, double capacitance) {
    const Eigen::Index n = conductance.rows();
    if (conductance.cols() != n)
        throw ContractViolation("rc network: conductance matrix must be square");
    if (capacitance <= 0.0)
        throw ContractViolation("rc network: capacitance must be positive");
    if (!conductance.isApprox(conductance.transpose(), 1e-12))
        throw ContractViolation("rc network: conductance matrix must be symmetric");

    RCNetwork net;
    net.capacitance = capacitance;
    net.laplacian = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double degree = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double g = conductance(i, j);
            if (g < 0.0)
                throw ContractViolation("rc network: conductances must be nonnegative");
            net.laplacian(i, j) = -g;
            degree += g;
        }
        net.laplacian(i, i) = degree;
    }
    return net;
}

RCNetwork rc_triangle(double resistance_ohm, double capacitance_farad) {
    const double g = 1.0 / resistance_ohm;
    Eigen::MatrixXd cond(3, 3);
    cond << 0, g, g, g, 0, g, g, g, 0;
    return make_rc_network(cond, capacitance_farad);
}

RCDiscretization rc_discretize(const RCNetwork& net, double dt) {
    if (dt <= 0.0) throw ContractViolation("rc_discretize: dt must be positive");
    const double gamma = dt / net.capacitance;
    const Eigen::Index n = net.laplacian.rows();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(net.laplacian);
    if (es.info() != Eigen::Success)
        throw Error("rc_discretize: eigendecomposition failed");
    const Eigen::VectorXd expvals = (-gamma * es.eigenvalues().array()).exp();

    RCDiscretization out;
    out.exact = es.eigenvectors() * expvals.asDiagonal() * es.eigenvectors().transpose();
    out.first_order = Eigen::MatrixXd::Identity(n, n) - gamma * net.laplacian;
    return out;
}

}  // namespace difact::diffusion
