#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gravtop/material.hpp"
#include "gravtop/mesh.hpp"

namespace gravtop {

/// Gravitational acceleration along +y (2D) / +z (3D); negative, so gravity
/// points down.
inline constexpr double kGravity = -9.81;

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Reference element data for a unit Young's modulus.
struct ElementKernel {
    int dim = 2;
    double nu = 0.3;
    double gravity = kGravity;
    Eigen::MatrixXd ke0; ///< 8x8 (Q4, plane stress, includes thickness) or 24x24 (H8)
    Eigen::VectorXd lg;  ///< lumped gravity stencil: g / nodes in the vertical slot of each node
};

/// 2x2 (2D) / 2x2x2 (3D) Gauss quadrature of B^T D B over a rectangular
/// element with the given edge lengths. Throws ParameterError unless
/// 0 < nu < 0.5.
ElementKernel reference_stiffness(int dim, const std::array<double, 3>& element_size, double nu, double thickness,
                                  double gravity = kGravity);
ElementKernel reference_stiffness(const Mesh& mesh, double nu, double gravity = kGravity);

enum class SolverKind { Auto, Direct, Cg };

struct SolverSettings {
    SolverKind kind = SolverKind::Auto; ///< Auto: direct in 2D, CG in 3D
    double cg_tolerance = 1e-8;         ///< relative residual
    double cg_max_iter_factor = 10.0;   ///< max iterations = factor * sqrt(free dofs)

    bool operator==(const SolverSettings&) const = default;
};

struct SolveReport {
    SolverKind kind = SolverKind::Direct;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Displacements and loads at one design.
struct FeState {
    Eigen::VectorXd f_gravity;
    Eigen::VectorXd f_external;
    double kappa = 0.0;
    Eigen::VectorXd displacement;
    SolveReport report;

    Eigen::VectorXd total_load() const { return f_gravity + kappa * f_external; }
};

/// Owns the reduced (fixed DOFs eliminated) stiffness operator for one mesh
/// and boundary set. The sparsity pattern, element scatter map and solver
/// symbolic analysis are computed once; assemble() only refreshes values.
/// Only the lower triangle of K is stored.
class FeSystem {
public:
    FeSystem(const Mesh& mesh, const BoundaryConditions& bc, ElementKernel kernel, SolverSettings settings = {},
             bool parallel = false);
    ~FeSystem();
    FeSystem(FeSystem&&) noexcept;
    FeSystem& operator=(FeSystem&&) noexcept;

    const Mesh& mesh() const { return *mesh_; }
    const ElementKernel& kernel() const { return kernel_; }
    const BoundaryConditions& boundary() const { return *bc_; }
    int num_free_dofs() const { return num_free_; }
    SolverKind solver_kind() const { return kind_; }

    /// K = sum_e E(xbar_e) ke0 on the free DOFs.
    const SparseMatrix& assemble(const SimpModel& simp, const Eigen::VectorXd& x_bar);
    const SparseMatrix& stiffness() const { return k_; }

    /// F_g with element stencils gamma(xbar_e) V_e lg, full length.
    Eigen::VectorXd gravity_load(const MassDensityModel& mass, const Eigen::VectorXd& x_bar) const;

    /// Solves K u = rhs with the last assembled K. Input and output are full
    /// length; fixed DOFs of the result are zero. Throws AnalysisError.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs);
    const SolveReport& last_report() const { return report_; }

    /// assemble + gravity + solve.
    FeState analyze(const SimpModel& simp, const MassDensityModel& mass, const Eigen::VectorXd& x_bar,
                    double kappa);

    Eigen::VectorXd reduce(const Eigen::VectorXd& full) const;
    Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;

    /// Element DOF values gathered from a full-length vector.
    void gather(const Eigen::VectorXd& full, int element, Eigen::VectorXd& out) const;

private:
    struct Solver;

    const Mesh* mesh_;
    const BoundaryConditions* bc_;
    ElementKernel kernel_;
    SolverSettings settings_;
    SolverKind kind_;
    bool parallel_;
    int num_free_ = 0;
    std::vector<int> free_index_;  // full dof -> reduced index or -1
    std::vector<int> free_dofs_;   // reduced index -> full dof
    std::vector<int> scatter_;     // element * dpe^2 -> value slot or -1
    SparseMatrix k_;
    std::unique_ptr<Solver> solver_;
    bool factorized_ = false;
    SolveReport report_;
};

/// f0 = (F_g + kappa F_ext)^T u.
double compliance(const Eigen::VectorXd& u, const Eigen::VectorXd& f_gravity, const Eigen::VectorXd& f_external,
                  double kappa);

} // namespace gravtop
