#include "gravtop/sensitivity.hpp"

#include "gravtop/error.hpp"

namespace gravtop {

Eigen::VectorXd objective_gradient(const FeSystem& fe, const SimpModel& simp, const MassDensityModel& mass,
                                   const Eigen::VectorXd& x_bar, const Eigen::VectorXd& u, bool frozen_loads) {
    const Mesh& mesh = fe.mesh();
    const ElementKernel& kernel = fe.kernel();
    const int nel = mesh.num_elements();
    if (x_bar.size() != nel || u.size() != mesh.num_dofs()) {
        throw ParameterError("objective_gradient: field sizes do not match the mesh");
    }
    const double ve = mesh.element_volume();
    Eigen::VectorXd grad(nel);
    Eigen::VectorXd ue;
    for (int e = 0; e < nel; ++e) {
        fe.gather(u, e, ue);
        const double strain = ue.dot(kernel.ke0 * ue);
        double g = -simp.modulus_deriv(x_bar[e]) * strain;
        if (!frozen_loads) g += 2.0 * mass.density_deriv(x_bar[e]) * ve * ue.dot(kernel.lg);
        grad[e] = g;
    }
    return grad;
}

ConstraintValue volume_constraint(const Eigen::VectorXd& x_bar, double v_star) {
    if (!(v_star > 0.0)) throw ParameterError("permitted volume must be > 0");
    ConstraintValue c;
    c.value = x_bar.sum() / v_star - 1.0;
    c.grad = Eigen::VectorXd::Constant(x_bar.size(), 1.0 / v_star);
    return c;
}

ConstraintValue mass_constraint(const Mesh& mesh, const MassDensityModel& mass, const Eigen::VectorXd& x_bar,
                                double m_max) {
    if (!(m_max > 0.0)) throw ParameterError("maximum permitted mass must be > 0");
    const double ve = mesh.element_volume();
    ConstraintValue c;
    c.grad.resize(x_bar.size());
    double total = 0.0;
    for (Eigen::Index e = 0; e < x_bar.size(); ++e) {
        total += ve * mass.density(x_bar[e]);
        c.grad[e] = -ve * mass.density_deriv(x_bar[e]) / m_max;
    }
    c.value = (m_max - total) / m_max;
    return c;
}

} // namespace gravtop
