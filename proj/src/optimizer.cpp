#include "gravtop/optimizer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gravtop/error.hpp"

namespace gravtop {

namespace {

template <class E>
[[noreturn]] void rethrow_at(const E& err, int iteration) {
    throw E(fmt::format("iteration {}: {}", iteration, err.what()));
}

Eigen::VectorXd restrict_to(const Eigen::VectorXd& full, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = full[idx[k]];
    return out;
}

} // namespace

Model::Model(const ProblemSpec& spec, SolverSettings solver, bool parallel)
    : spec_(spec), mesh_(build_mesh(spec.mesh)), bc_(resolve_boundary(mesh_, resolved_boundary(spec))),
      filter_(build_filter(mesh_, filter_radius(spec))),
      fe_(mesh_, bc_, reference_stiffness(mesh_, spec.nu), solver, parallel), chain_(mesh_, filter_) {}

Eigen::VectorXd Model::initial_design() const {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(mesh_.num_elements(), spec_.vf_star);
    chain_.pin(x);
    return x;
}

Evaluation Model::evaluate(const Eigen::VectorXd& x, double beta, bool frozen_loads) {
    chain_.update(x, beta);
    const Eigen::VectorXd& xbar = chain_.x_bar();
    state_ = fe_.analyze(spec_.simp, spec_.mass, xbar, spec_.kappa);

    Evaluation ev;
    const Eigen::VectorXd& u = state_.displacement;
    ev.f0 = compliance(u, state_.f_gravity, state_.f_external, state_.kappa);
    ev.max_displacement = u.cwiseAbs().maxCoeff();
    ev.report = state_.report;

    const Eigen::VectorXd df0 = objective_gradient(fe_, spec_.simp, spec_.mass, xbar, u, frozen_loads);
    const ConstraintValue g1 = volume_constraint(xbar, v_star());
    const ConstraintValue g2 = mass_constraint(mesh_, spec_.mass, xbar, m_max());
    ev.g1 = g1.value;
    ev.g2 = g2.value;
    ev.grad.d_f0_dx = chain_.chain_gradient(df0);
    ev.grad.d_g1_dx = chain_.chain_gradient(g1.grad);
    ev.grad.d_g2_dx = chain_.chain_gradient(g2.grad);
    return ev;
}

RunResult run(const ProblemSpec& spec, const RunOptions& options, const IterationCallback& callback) {
    validate(spec);
    if (options.n_iter < 1) throw ConfigError("iteration count must be >= 1");

    Model model(spec, options.solver, options.parallel);
    const std::vector<int>& design = model.mesh().design_elements();
    const auto n = static_cast<Eigen::Index>(design.size());
    if (n == 0) throw ConfigError("the problem has no design elements");
    const Eigen::Index m = spec.g2_enabled ? 2 : 1;

    MmaSettings mma_settings = options.mma;
    mma_settings.move = spec.move_limit;
    MmaState mma(n, m, mma_settings, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n));

    RunResult result;
    Eigen::VectorXd x = model.initial_design();
    result.history.reserve(static_cast<std::size_t>(options.n_iter));

    for (int it = 1; it <= options.n_iter; ++it) {
        try {
            const double beta = continuation_step(it, options.continuation);
            const Evaluation ev = model.evaluate(x, beta);
            if (!std::isfinite(ev.f0)) throw AnalysisError("compliance is not finite");

            IterationRecord rec;
            rec.iter = it;
            rec.f0 = ev.f0;
            rec.vol_frac = model.chain().x_bar().mean();
            rec.g1 = ev.g1;
            rec.g2 = ev.g2;
            rec.beta = beta;
            rec.max_displacement = ev.max_displacement;
            rec.solver_iterations = ev.report.iterations;
            rec.solver_residual = ev.report.relative_residual;

            const Eigen::VectorXd xd = restrict_to(x, design);
            Eigen::VectorXd g(m);
            Eigen::MatrixXd dg(m, n);
            g[0] = ev.g1;
            dg.row(0) = restrict_to(ev.grad.d_g1_dx, design).transpose();
            if (spec.g2_enabled) {
                g[1] = ev.g2;
                dg.row(1) = restrict_to(ev.grad.d_g2_dx, design).transpose();
            }
            const Eigen::VectorXd xnew = mma.update(xd, options.objective_scale * ev.f0,
                                                    options.objective_scale * restrict_to(ev.grad.d_f0_dx, design),
                                                    g, dg);
            rec.max_change = (xnew - xd).cwiseAbs().maxCoeff();

            result.history.push_back(rec);
            if (callback) callback(rec, model.chain());

            for (Eigen::Index k = 0; k < n; ++k) x[design[static_cast<std::size_t>(k)]] = xnew[k];
            if (options.stop_on_change && rec.max_change < options.change_tolerance) break;
        } catch (const AnalysisError& e) {
            rethrow_at(e, it);
        } catch (const OptimizerError& e) {
            rethrow_at(e, it);
        } catch (const ParameterError& e) {
            rethrow_at(e, it);
        }
    }

    // Final fields are those of the last analysed iterate.
    const FieldChain& chain = model.chain();
    result.x = chain.x();
    result.x_tilde = chain.x_tilde();
    result.x_bar = chain.x_bar();
    result.beta = chain.beta();
    return result;
}

} // namespace gravtop
