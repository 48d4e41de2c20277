#pragma once

#include "difact/errors.hpp"

#include <Eigen/Dense>

#include <utility>

namespace difact::diffusion {

/// Resistor-capacitor network: symmetric conductance Laplacian
/// (L_ii = sum_j g_ij, L_ij = -g_ij) plus a per-node capacitance C, so that
/// the node voltages obey C dV/dt = -L V.
struct RCNetwork {
    Eigen::MatrixXd laplacian;
    double capacitance = 1.0;
};

/// Builds the Laplacian from a symmetric nonnegative conductance matrix
/// (diagonal ignored).  Throws ContractViolation on asymmetry or negative
/// conductances.
RCNetwork make_rc_network(const Eigen::MatrixXd& conductance, double capacitance);

/// Triangle of equal resistors with equal grounded capacitors.
RCNetwork rc_triangle(double resistance_ohm, double capacitance_farad);

struct RCDiscretization {
    Eigen::MatrixXd exact;        // exp(-(dt/C) L), via symmetric eigendecomposition
    Eigen::MatrixXd first_order;  // I - (dt/C) L
};

/// Samples the continuous heat flow at interval dt.  Both returned matrices
/// map the all-ones vector to itself (zero row sums of L).
RCDiscretization rc_discretize(const RCNetwork& net, double dt);

}  // namespace difact::diffusion
