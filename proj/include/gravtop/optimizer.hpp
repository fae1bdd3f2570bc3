#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "gravtop/fem.hpp"
#include "gravtop/field_chain.hpp"
#include "gravtop/mma.hpp"
#include "gravtop/problems.hpp"
#include "gravtop/sensitivity.hpp"

namespace gravtop {

struct RunOptions {
    int n_iter = 250;
    ContinuationSchedule continuation;
    MmaSettings mma;               ///< `move` is overwritten by the problem's move limit
    double objective_scale = 100.0; ///< f0 is multiplied by this before MMA sees it
    SolverSettings solver;
    bool parallel = false;
    /// Optional early exit once max|x_new - x| drops below the threshold.
    bool stop_on_change = false;
    double change_tolerance = 1e-3;

    bool operator==(const RunOptions&) const = default;
};

/// One row of the convergence history; f0 in N m, unscaled.
struct IterationRecord {
    int iter = 0;
    double f0 = 0.0;
    double vol_frac = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    double beta = 1.0;
    double max_change = 0.0;
    // diagnostics, not written to history.csv
    double max_displacement = 0.0;
    int solver_iterations = 0;
    double solver_residual = 0.0;
};

/// Objective and constraints at one design, with gradients w.r.t. x.
struct Evaluation {
    double f0 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    GradientBundle grad;
    double max_displacement = 0.0;
    SolveReport report;
};

/// A problem instantiated on its mesh: boundary conditions, element kernel,
/// filter, FE system and field chain. Not copyable or movable; members refer
/// to each other.
class Model {
public:
    explicit Model(const ProblemSpec& spec, SolverSettings solver = {}, bool parallel = false);
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    /// Updates the field chain to (x, beta), solves the state equation and
    /// evaluates f0, g1 and g2 with their full-chain gradients.
    Evaluation evaluate(const Eigen::VectorXd& x, double beta, bool frozen_loads = false);

    const ProblemSpec& spec() const { return spec_; }
    const Mesh& mesh() const { return mesh_; }
    const BoundaryConditions& boundary() const { return bc_; }
    const FilterOperator& filter() const { return filter_; }
    const FieldChain& chain() const { return chain_; }
    FeSystem& fe() { return fe_; }
    const FeState& state() const { return state_; }

    double v_star() const { return spec_.vf_star * mesh_.num_elements(); }
    double m_max() const { return mesh_.volume() * spec_.mass.gamma_solid * spec_.vf_star; }

    /// x = vf_star on design elements, pinned values elsewhere.
    Eigen::VectorXd initial_design() const;

private:
    ProblemSpec spec_;
    Mesh mesh_;
    BoundaryConditions bc_;
    FilterOperator filter_;
    FeSystem fe_;
    FieldChain chain_;
    FeState state_;
};

struct RunResult {
    Eigen::VectorXd x;
    Eigen::VectorXd x_tilde;
    Eigen::VectorXd x_bar;
    double beta = 1.0;
    std::vector<IterationRecord> history;
};

/// Called after every recorded iteration with the analysed fields.
using IterationCallback = std::function<void(const IterationRecord&, const FieldChain&)>;

/// The optimization loop: continuation -> filter/project -> analysis ->
/// gradients -> MMA step. Errors are rethrown with the iteration index.
RunResult run(const ProblemSpec& spec, const RunOptions& options, const IterationCallback& callback = {});

} // namespace gravtop
