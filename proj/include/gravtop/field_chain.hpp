#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gravtop/mesh.hpp"

namespace gravtop {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Density filter x_tilde = P x with linear-hat weights
/// w = max(0, 1 - |z_e - z_i| / radius), volume weighted and normalized per
/// row over the (possibly truncated) neighbourhood.
class FilterOperator {
public:
    /// Throws ParameterError when radius <= 0.
    static FilterOperator build(const Mesh& mesh, double radius);

    const SparseRowMatrix& matrix() const { return matrix_; }
    double radius() const { return radius_; }

    /// True when the radius does not reach any neighbour centroid, i.e. P = I.
    bool degenerate() const { return degenerate_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix_ * x; }
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const { return matrix_.transpose() * v; }

private:
    SparseRowMatrix matrix_;
    double radius_ = 0.0;
    bool degenerate_ = false;
};

FilterOperator build_filter(const Mesh& mesh, double radius);

/// Threshold of the physical-field projection; only 0.5 is supported.
inline constexpr double kProjectionEta = 0.5;

/// xbar = [tanh(beta/2) + tanh(beta (xt - 1/2))] / (2 tanh(beta/2)).
double project(double x_tilde, double beta);
double project_deriv(double x_tilde, double beta);
Eigen::VectorXd project(const Eigen::VectorXd& x_tilde, double beta);

struct ContinuationSchedule {
    double beta_initial = 1.0;
    double beta_max = 256.0;
    int period = 25; ///< iterations between doublings

    bool operator==(const ContinuationSchedule&) const = default;
};

/// beta for a 1-based iteration: beta_initial * 2^floor((iter - 1) / period),
/// capped at beta_max.
double continuation_step(int iteration, const ContinuationSchedule& schedule = {});

/// Design field x, filtered field x_tilde and physical field xbar, kept
/// consistent by update(). Non-design elements are re-pinned (void 0,
/// solid 1) in x and xbar after every pass.
class FieldChain {
public:
    FieldChain(const Mesh& mesh, const FilterOperator& filter);

    void update(const Eigen::VectorXd& x, double beta);

    /// df/dx = P^T (df/dxbar .* dxbar/dx_tilde); pinned entries are zero on
    /// both sides of the filter.
    Eigen::VectorXd chain_gradient(const Eigen::VectorXd& df_dxbar) const;

    const Eigen::VectorXd& x() const { return x_; }
    const Eigen::VectorXd& x_tilde() const { return x_tilde_; }
    const Eigen::VectorXd& x_bar() const { return x_bar_; }
    double beta() const { return beta_; }

    /// Applies the non-design pinning to an arbitrary element field.
    void pin(Eigen::VectorXd& field) const;

private:
    const Mesh* mesh_;
    const FilterOperator* filter_;
    Eigen::VectorXd x_;
    Eigen::VectorXd x_tilde_;
    Eigen::VectorXd x_bar_;
    double beta_ = 1.0;
};

} // namespace gravtop
