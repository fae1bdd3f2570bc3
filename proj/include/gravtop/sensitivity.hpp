#pragma once

#include <Eigen/Core>

#include "gravtop/fem.hpp"
#include "gravtop/field_chain.hpp"

namespace gravtop {

/// Objective gradient with respect to the physical field, adjoint form with
/// lambda = -2u:
///   df0/dxbar_e = -u_e^T (dE/dxbar_e) ke0 u_e + 2 u_e^T (dgamma/dxbar_e) lg V_e.
/// With `frozen_loads` the load-derivative term is dropped (classical
/// design-independent compliance gradient, used for sign checks).
Eigen::VectorXd objective_gradient(const FeSystem& fe, const SimpModel& simp, const MassDensityModel& mass,
                                   const Eigen::VectorXd& x_bar, const Eigen::VectorXd& u, bool frozen_loads = false);

struct ConstraintValue {
    double value = 0.0;     ///< normalized, feasible when <= 0
    Eigen::VectorXd grad;   ///< w.r.t. xbar
};

/// g1 = sum(xbar) / v_star - 1 with v_star = vf_star * Nel.
ConstraintValue volume_constraint(const Eigen::VectorXd& x_bar, double v_star);

/// g2 = (m_max - sum_e V_e gamma(xbar_e)) / m_max with m_max = V gamma_s vf_star.
ConstraintValue mass_constraint(const Mesh& mesh, const MassDensityModel& mass, const Eigen::VectorXd& x_bar,
                                double m_max);

/// Gradients with respect to the design field x, after the chain rule.
struct GradientBundle {
    Eigen::VectorXd d_f0_dx;
    Eigen::VectorXd d_g1_dx;
    Eigen::VectorXd d_g2_dx;
};

} // namespace gravtop
