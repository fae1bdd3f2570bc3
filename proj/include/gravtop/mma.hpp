#pragma once

#include <Eigen/Core>

namespace gravtop {

/// Method of Moving Asymptotes settings. The subproblem is
///   min  f0~(x) + sum_i (c y_i + d y_i^2 / 2)
///   s.t. g_i~(x) <= y_i,  y_i >= 0,  alpha <= x <= beta
/// where the elastic variables y_i keep it feasible when the linearized
/// constraints conflict.
struct MmaSettings {
    double move = 0.1;      ///< external move limit on |x_new - x|
    double asyinit = 0.5;   ///< initial asymptote distance, fraction of the variable range
    double asyincr = 1.2;   ///< widening factor for monotone progress
    double asydecr = 0.7;   ///< narrowing factor on oscillation
    double albefa = 0.1;    ///< keeps the box a fraction away from the asymptotes
    double raa0 = 1e-5;     ///< curvature regularization
    double c = 1000.0;      ///< linear penalty on constraint violation
    double d = 1.0;         ///< quadratic penalty on constraint violation
    int dual_max_iter = 200;
    double dual_tolerance = 1e-10;

    bool operator==(const MmaSettings&) const = default;
};

/// Asymptote memory and previous iterates for one optimization run.
class MmaState {
public:
    MmaState(Eigen::Index n, Eigen::Index m, MmaSettings settings, Eigen::VectorXd lower, Eigen::VectorXd upper);

    /// One MMA step. `dg` holds one constraint gradient per row; constraint
    /// values are in normalized `<= 0` form. Throws OptimizerError on
    /// non-finite input.
    Eigen::VectorXd update(const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& df0,
                           const Eigen::VectorXd& g, const Eigen::MatrixXd& dg);

    int iteration() const { return iteration_; }
    const Eigen::VectorXd& lower_asymptote() const { return low_; }
    const Eigen::VectorXd& upper_asymptote() const { return upp_; }
    const Eigen::VectorXd& multipliers() const { return lambda_; }
    const Eigen::VectorXd& elastic() const { return y_; }
    const MmaSettings& settings() const { return settings_; }

    /// Box [alpha, beta] of the last subproblem.
    const Eigen::VectorXd& alpha() const { return alpha_; }
    const Eigen::VectorXd& beta() const { return beta_; }

private:
    Eigen::Index n_;
    Eigen::Index m_;
    MmaSettings settings_;
    Eigen::VectorXd xmin_, xmax_;
    Eigen::VectorXd xold1_, xold2_;
    Eigen::VectorXd low_, upp_;
    Eigen::VectorXd alpha_, beta_;
    Eigen::VectorXd lambda_;
    Eigen::VectorXd y_;
    int iteration_ = 0;
};

} // namespace gravtop
