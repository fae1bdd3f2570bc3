#include "gravtop/fem.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "gravtop/error.hpp"

namespace gravtop {

namespace {

// Natural coordinate sign of each local node, matching Mesh connectivity.
constexpr int kNodeSigns[8][3] = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                                  {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};

Eigen::MatrixXd elasticity_matrix(int dim, double nu) {
    if (dim == 2) {
        Eigen::MatrixXd d(3, 3);
        const double c = 1.0 / (1.0 - nu * nu);
        d << c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, c * (1.0 - nu) / 2.0;
        return d;
    }
    const double lambda = nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    const double mu = 1.0 / (2.0 * (1.0 + nu));
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(6, 6);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) d(a, b) = lambda;
        d(a, a) = lambda + 2.0 * mu;
        d(3 + a, 3 + a) = mu;
    }
    return d;
}

// Strain-displacement matrix at natural point xi for a box element.
Eigen::MatrixXd strain_matrix(int dim, const std::array<double, 3>& h, const std::array<double, 3>& xi) {
    const int nn = dim == 2 ? 4 : 8;
    const double scale = dim == 2 ? 0.25 : 0.125;
    Eigen::MatrixXd grad(nn, dim); // dN_a / dx_d
    for (int a = 0; a < nn; ++a) {
        for (int d = 0; d < dim; ++d) {
            double v = scale * kNodeSigns[a][d];
            for (int o = 0; o < dim; ++o) {
                if (o != d) v *= 1.0 + kNodeSigns[a][o] * xi[o];
            }
            grad(a, d) = v * 2.0 / h[d];
        }
    }
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim == 2 ? 3 : 6, nn * dim);
    for (int a = 0; a < nn; ++a) {
        if (dim == 2) {
            b(0, 2 * a) = grad(a, 0);
            b(1, 2 * a + 1) = grad(a, 1);
            b(2, 2 * a) = grad(a, 1);
            b(2, 2 * a + 1) = grad(a, 0);
        } else {
            const int c = 3 * a;
            b(0, c) = grad(a, 0);
            b(1, c + 1) = grad(a, 1);
            b(2, c + 2) = grad(a, 2);
            b(3, c) = grad(a, 1);
            b(3, c + 1) = grad(a, 0);
            b(4, c + 1) = grad(a, 2);
            b(4, c + 2) = grad(a, 1);
            b(5, c) = grad(a, 2);
            b(5, c + 2) = grad(a, 0);
        }
    }
    return b;
}

} // namespace

ElementKernel reference_stiffness(int dim, const std::array<double, 3>& element_size, double nu, double thickness,
                                  double gravity) {
    if (dim != 2 && dim != 3) throw ParameterError(fmt::format("element dimension must be 2 or 3, got {}", dim));
    if (!(nu > 0.0 && nu < 0.5)) throw ParameterError(fmt::format("Poisson's ratio must be in (0, 0.5), got {}", nu));

    ElementKernel k;
    k.dim = dim;
    k.nu = nu;
    k.gravity = gravity;
    const int nn = dim == 2 ? 4 : 8;
    const int ndof = nn * dim;
    const Eigen::MatrixXd d = elasticity_matrix(dim, nu);

    double det = 1.0;
    for (int a = 0; a < dim; ++a) det *= element_size[a] / 2.0;
    if (dim == 2) det *= thickness;

    const double g = 1.0 / std::sqrt(3.0);
    k.ke0 = Eigen::MatrixXd::Zero(ndof, ndof);
    const int npts = 1 << dim;
    for (int p = 0; p < npts; ++p) {
        std::array<double, 3> xi{(p & 1) ? g : -g, (p & 2) ? g : -g, (p & 4) ? g : -g};
        const Eigen::MatrixXd b = strain_matrix(dim, element_size, xi);
        k.ke0.noalias() += b.transpose() * d * b * det;
    }
    k.ke0 = 0.5 * (k.ke0 + k.ke0.transpose()).eval();

    k.lg = Eigen::VectorXd::Zero(ndof);
    for (int a = 0; a < nn; ++a) k.lg[a * dim + dim - 1] = gravity / nn;
    return k;
}

ElementKernel reference_stiffness(const Mesh& mesh, double nu, double gravity) {
    return reference_stiffness(mesh.dim(), {mesh.element_size(0), mesh.element_size(1), mesh.element_size(2)}, nu,
                               mesh.thickness(), gravity);
}

struct FeSystem::Solver {
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower> direct;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower, Eigen::IncompleteCholesky<double, Eigen::Lower>> cg;
};

FeSystem::FeSystem(const Mesh& mesh, const BoundaryConditions& bc, ElementKernel kernel, SolverSettings settings,
                   bool parallel)
    : mesh_(&mesh), bc_(&bc), kernel_(std::move(kernel)), settings_(settings), parallel_(parallel),
      solver_(std::make_unique<Solver>()) {
    if (kernel_.dim != mesh.dim()) throw ParameterError("element kernel dimension does not match the mesh");
    kind_ = settings_.kind;
    if (kind_ == SolverKind::Auto) kind_ = mesh.dim() == 2 ? SolverKind::Direct : SolverKind::Cg;

    if (bc.fixed_dofs.empty())
        throw AnalysisError("no DOF is fixed; the stiffness matrix is singular (free rigid-body motion)");
    const int ndofs = mesh.num_dofs();
    free_index_.assign(ndofs, 0);
    for (int d : bc.fixed_dofs) {
        if (d < 0 || d >= ndofs) throw ConfigError(fmt::format("fixed DOF {} out of range", d));
        free_index_[d] = -1;
    }
    for (int d = 0; d < ndofs; ++d) {
        if (free_index_[d] >= 0) {
            free_index_[d] = static_cast<int>(free_dofs_.size());
            free_dofs_.push_back(d);
        }
    }
    num_free_ = static_cast<int>(free_dofs_.size());
    if (num_free_ == 0) throw ConfigError("every DOF is fixed");

    // Lower-triangular pattern.
    const int dpe = mesh.dofs_per_element();
    const int nel = mesh.num_elements();
    std::vector<Eigen::Triplet<double>> pattern;
    pattern.reserve(static_cast<std::size_t>(nel) * dpe * (dpe + 1) / 2);
    for (int e = 0; e < nel; ++e) {
        const auto dofs = mesh.element_dofs(e);
        for (int a = 0; a < dpe; ++a) {
            const int r = free_index_[dofs[a]];
            if (r < 0) continue;
            for (int b = 0; b < dpe; ++b) {
                const int c = free_index_[dofs[b]];
                if (c < 0 || r < c) continue;
                pattern.emplace_back(r, c, 0.0);
            }
        }
    }
    k_.resize(num_free_, num_free_);
    k_.setFromTriplets(pattern.begin(), pattern.end());
    k_.makeCompressed();
    pattern.clear();
    pattern.shrink_to_fit();

    scatter_.assign(static_cast<std::size_t>(nel) * dpe * dpe, -1);
    const int* outer = k_.outerIndexPtr();
    const int* inner = k_.innerIndexPtr();
    for (int e = 0; e < nel; ++e) {
        const auto dofs = mesh.element_dofs(e);
        for (int a = 0; a < dpe; ++a) {
            const int r = free_index_[dofs[a]];
            if (r < 0) continue;
            for (int b = 0; b < dpe; ++b) {
                const int c = free_index_[dofs[b]];
                if (c < 0 || r < c) continue;
                const int* first = inner + outer[c];
                const int* last = inner + outer[c + 1];
                const int* pos = std::lower_bound(first, last, r);
                scatter_[(static_cast<std::size_t>(e) * dpe + a) * dpe + b] = static_cast<int>(pos - inner);
            }
        }
    }

    if (kind_ == SolverKind::Direct) solver_->direct.analyzePattern(k_);
    const double max_iter = settings_.cg_max_iter_factor * std::sqrt(static_cast<double>(num_free_));
    solver_->cg.setTolerance(settings_.cg_tolerance);
    solver_->cg.setMaxIterations(std::max(1, static_cast<int>(std::ceil(max_iter))));
}

FeSystem::~FeSystem() = default;
FeSystem::FeSystem(FeSystem&&) noexcept = default;
FeSystem& FeSystem::operator=(FeSystem&&) noexcept = default;

namespace {

// Checked up front: an exception must not escape an OpenMP region.
void check_physical_field(const Eigen::VectorXd& x_bar, int num_elements) {
    if (x_bar.size() != num_elements) throw ParameterError("physical field length does not match the mesh");
    for (Eigen::Index e = 0; e < x_bar.size(); ++e) {
        if (!(x_bar[e] >= 0.0 && x_bar[e] <= 1.0))
            throw ParameterError(fmt::format("physical density {} of element {} outside [0, 1]", x_bar[e], e));
    }
}

} // namespace

const SparseMatrix& FeSystem::assemble(const SimpModel& simp, const Eigen::VectorXd& x_bar) {
    check_physical_field(x_bar, mesh_->num_elements());
    simp.validate();
    const int dpe = mesh_->dofs_per_element();
    double* values = k_.valuePtr();
    std::fill(values, values + k_.nonZeros(), 0.0);
    const double* ke = kernel_.ke0.data(); // column major, symmetric

    // Elements of one color share no node, so their scatter targets are disjoint.
    for (const auto& color : mesh_->colors()) {
        const int count = static_cast<int>(color.size());
#pragma omp parallel for schedule(static) if (parallel_)
        for (int idx = 0; idx < count; ++idx) {
            const int e = color[idx];
            const double modulus = simp.modulus(x_bar[e]);
            const int* slots = scatter_.data() + static_cast<std::size_t>(e) * dpe * dpe;
            for (int a = 0; a < dpe; ++a) {
                for (int b = 0; b < dpe; ++b) {
                    const int s = slots[a * dpe + b];
                    if (s >= 0) values[s] += modulus * ke[b * dpe + a];
                }
            }
        }
    }
    factorized_ = false;
    return k_;
}

Eigen::VectorXd FeSystem::gravity_load(const MassDensityModel& mass, const Eigen::VectorXd& x_bar) const {
    check_physical_field(x_bar, mesh_->num_elements());
    mass.validate();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh_->num_dofs());
    const double ve = mesh_->element_volume();
    const int dpe = mesh_->dofs_per_element();
    for (const auto& color : mesh_->colors()) {
        const int count = static_cast<int>(color.size());
#pragma omp parallel for schedule(static) if (parallel_)
        for (int idx = 0; idx < count; ++idx) {
            const int e = color[idx];
            const double scale = mass.density(x_bar[e]) * ve;
            const auto dofs = mesh_->element_dofs(e);
            for (int a = 0; a < dpe; ++a) f[dofs[a]] += scale * kernel_.lg[a];
        }
    }
    return f;
}

Eigen::VectorXd FeSystem::reduce(const Eigen::VectorXd& full) const {
    Eigen::VectorXd r(num_free_);
    for (int i = 0; i < num_free_; ++i) r[i] = full[free_dofs_[i]];
    return r;
}

Eigen::VectorXd FeSystem::expand(const Eigen::VectorXd& reduced) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(mesh_->num_dofs());
    for (int i = 0; i < num_free_; ++i) full[free_dofs_[i]] = reduced[i];
    return full;
}

void FeSystem::gather(const Eigen::VectorXd& full, int element, Eigen::VectorXd& out) const {
    const auto dofs = mesh_->element_dofs(element);
    out.resize(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t a = 0; a < dofs.size(); ++a) out[static_cast<Eigen::Index>(a)] = full[dofs[a]];
}

Eigen::VectorXd FeSystem::solve(const Eigen::VectorXd& rhs) {
    if (rhs.size() != mesh_->num_dofs()) throw ParameterError("right-hand side length does not match the mesh");
    const Eigen::VectorXd b = reduce(rhs);
    const double bnorm = b.norm();
    report_ = SolveReport{};
    report_.kind = kind_;
    if (bnorm == 0.0) return Eigen::VectorXd::Zero(mesh_->num_dofs());

    Eigen::VectorXd x;
    if (kind_ == SolverKind::Direct) {
        if (!factorized_) {
            solver_->direct.factorize(k_);
            if (solver_->direct.info() != Eigen::Success) {
                throw AnalysisError("sparse Cholesky factorization failed; the reduced stiffness is not positive "
                                    "definite (check the supports)");
            }
            factorized_ = true;
        }
        x = solver_->direct.solve(b);
    } else {
        if (!factorized_) {
            solver_->cg.compute(k_);
            if (solver_->cg.info() != Eigen::Success) throw AnalysisError("incomplete Cholesky preconditioner failed");
            factorized_ = true;
        }
        x = solver_->cg.solve(b);
        report_.iterations = static_cast<int>(solver_->cg.iterations());
        if (solver_->cg.info() != Eigen::Success) {
            const double res = (k_.selfadjointView<Eigen::Lower>() * x - b).norm() / bnorm;
            throw AnalysisError(fmt::format("conjugate gradient did not converge in {} iterations (relative "
                                            "residual {:.3e}, tolerance {:.1e})",
                                            report_.iterations, res, settings_.cg_tolerance));
        }
    }
    report_.relative_residual = (k_.selfadjointView<Eigen::Lower>() * x - b).norm() / bnorm;
    if (!std::isfinite(report_.relative_residual)) throw AnalysisError("linear solve produced non-finite values");
    return expand(x);
}

FeState FeSystem::analyze(const SimpModel& simp, const MassDensityModel& mass, const Eigen::VectorXd& x_bar,
                          double kappa) {
    FeState s;
    assemble(simp, x_bar);
    s.f_gravity = gravity_load(mass, x_bar);
    s.f_external = bc_->f_ext;
    s.kappa = kappa;
    s.displacement = solve(s.total_load());
    s.report = report_;
    return s;
}

double compliance(const Eigen::VectorXd& u, const Eigen::VectorXd& f_gravity, const Eigen::VectorXd& f_external,
                  double kappa) {
    return (f_gravity + kappa * f_external).dot(u);
}

} // namespace gravtop
