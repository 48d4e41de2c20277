#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "difact/rc.hpp"

#include <cmath>

using namespace difact;
using namespace difact::diffusion;

TEST_CASE("single node network is the identity") {
    RCNetwork net = make_rc_network(Eigen::MatrixXd::Zero(1, 1), 1.0);
    const auto d = rc_discretize(net, 0.5);
    CHECK(d.exact(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.first_order(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("two-node unit-conductance closed form") {
    Eigen::MatrixXd cond(2, 2);
    cond << 0, 1, 1, 0;
    const RCNetwork net = make_rc_network(cond, 1.0);
    const double gamma = 0.3;
    const auto d = rc_discretize(net, gamma);

    // L has eigenvalues {0, 2}: exact spectrum {1, e^(-2 gamma)},
    // first order {1, 1 - 2 gamma}.
    const double e = std::exp(-2.0 * gamma);
    CHECK(d.exact(0, 0) == doctest::Approx((1 + e) / 2).epsilon(1e-12));
    CHECK(d.exact(0, 1) == doctest::Approx((1 - e) / 2).epsilon(1e-12));
    CHECK(d.first_order(0, 0) == doctest::Approx(1 - gamma).epsilon(1e-12));
    CHECK(d.first_order(0, 1) == doctest::Approx(gamma).epsilon(1e-12));
}

TEST_CASE("laplacian structure and stochasticity on constants") {
    const RCNetwork net = rc_triangle(1000.0, 1e-6);
    CHECK(net.laplacian.rows() == 3);
    CHECK(net.laplacian.isApprox(net.laplacian.transpose(), 1e-15));
    for (int i = 0; i < 3; ++i) {
        CHECK(net.laplacian.row(i).sum() == doctest::Approx(0.0).epsilon(1e-18));
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(net.laplacian(i, j) <= 0.0);
    }

    const auto d = rc_discretize(net, 1e-7);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    CHECK((d.exact * ones - ones).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((d.first_order * ones - ones).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("validation failures") {
    Eigen::MatrixXd bad(2, 2);
    bad << 0, 1, 2, 0;
    CHECK_THROWS_AS(make_rc_network(bad, 1.0), ContractViolation);
    Eigen::MatrixXd neg(2, 2);
    neg << 0, -1, -1, 0;
    CHECK_THROWS_AS(make_rc_network(neg, 1.0), ContractViolation);
    CHECK_THROWS_AS(make_rc_network(Eigen::MatrixXd::Zero(2, 2), 0.0),
                    ContractViolation);
    CHECK_THROWS_AS(rc_discretize(rc_triangle(1000.0, 1e-6), 0.0), ContractViolation);
}

TEST_CASE("first-order error shrinks quadratically on the triangle") {
    const RCNetwork net = rc_triangle(1000.0, 1e-6);
    double prev_norm = 0.0;
    for (int k = 1; k <= 4; ++k) {
        const double gamma = std::pow(10.0, -k);
        const auto d = rc_discretize(net, gamma * net.capacitance);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.exact - d.first_order);
        const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
        if (k > 1) {
            const double ratio = prev_norm / norm;
            CHECK(ratio == doctest::Approx(100.0).epsilon(0.05));
        }
        prev_norm = norm;
    }
}
