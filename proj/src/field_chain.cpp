#include "gravtop/field_chain.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "gravtop/error.hpp"

namespace gravtop {

FilterOperator FilterOperator::build(const Mesh& mesh, double radius) {
    if (!(radius > 0.0)) throw ParameterError(fmt::format("filter radius must be > 0, got {}", radius));

    const int dim = mesh.dim();
    std::array<int, 3> reach{0, 0, 0};
    std::array<double, 3> h{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
        h[a] = mesh.element_size(a);
        reach[a] = static_cast<int>(std::ceil(radius / h[a]));
    }
    const double ve = mesh.element_volume();
    const int nel = mesh.num_elements();

    FilterOperator f;
    f.radius_ = radius;
    f.matrix_.resize(nel, nel);
    std::vector<Eigen::Triplet<double>> entries;
    std::size_t estimate = 1;
    for (int a = 0; a < dim; ++a) estimate *= static_cast<std::size_t>(2 * reach[a] + 1);
    entries.reserve(estimate * static_cast<std::size_t>(nel));

    bool any_neighbour = false;
    std::vector<std::pair<int, double>> row;
    for (int e = 0; e < nel; ++e) {
        const auto [i, j, k] = mesh.element_ijk(e);
        row.clear();
        double total = 0.0;
        for (int dk = (dim == 3 ? -reach[2] : 0); dk <= (dim == 3 ? reach[2] : 0); ++dk) {
            const int kk = k + dk;
            if (kk < 0 || kk >= (dim == 3 ? mesh.nel(2) : 1)) continue;
            for (int dj = -reach[1]; dj <= reach[1]; ++dj) {
                const int jj = j + dj;
                if (jj < 0 || jj >= mesh.nel(1)) continue;
                for (int di = -reach[0]; di <= reach[0]; ++di) {
                    const int ii = i + di;
                    if (ii < 0 || ii >= mesh.nel(0)) continue;
                    const double dx = di * h[0];
                    const double dy = dj * h[1];
                    const double dz = dk * h[2];
                    const double w = std::max(0.0, 1.0 - std::sqrt(dx * dx + dy * dy + dz * dz) / radius);
                    if (w <= 0.0) continue;
                    row.emplace_back(mesh.element_index(ii, jj, kk), ve * w);
                    total += ve * w;
                }
            }
        }
        if (row.size() > 1) any_neighbour = true;
        for (const auto& [col, w] : row) entries.emplace_back(e, col, w / total);
    }
    f.matrix_.setFromTriplets(entries.begin(), entries.end());
    f.matrix_.makeCompressed();
    f.degenerate_ = !any_neighbour;
    return f;
}

FilterOperator build_filter(const Mesh& mesh, double radius) { return FilterOperator::build(mesh, radius); }

double project(double x_tilde, double beta) {
    const double t = std::tanh(0.5 * beta);
    // Rounding in the filter can put x_tilde a few ulps outside [0, 1].
    return std::clamp((t + std::tanh(beta * (x_tilde - kProjectionEta))) / (2.0 * t), 0.0, 1.0);
}

double project_deriv(double x_tilde, double beta) {
    // sech^2 rather than 1 - tanh^2, which cancels to zero once tanh rounds to 1.
    const double c = std::cosh(beta * (x_tilde - kProjectionEta));
    return beta / (c * c * 2.0 * std::tanh(0.5 * beta));
}

Eigen::VectorXd project(const Eigen::VectorXd& x_tilde, double beta) {
    return x_tilde.unaryExpr([beta](double v) { return project(v, beta); });
}

double continuation_step(int iteration, const ContinuationSchedule& schedule) {
    if (iteration < 1) throw ParameterError(fmt::format("iteration must be >= 1, got {}", iteration));
    const int doublings = (iteration - 1) / schedule.period;
    const double beta = schedule.beta_initial * std::ldexp(1.0, std::min(doublings, 1000));
    return std::min(beta, schedule.beta_max);
}

FieldChain::FieldChain(const Mesh& mesh, const FilterOperator& filter)
    : mesh_(&mesh), filter_(&filter), x_(Eigen::VectorXd::Zero(mesh.num_elements())),
      x_tilde_(Eigen::VectorXd::Zero(mesh.num_elements())), x_bar_(Eigen::VectorXd::Zero(mesh.num_elements())) {}

void FieldChain::pin(Eigen::VectorXd& field) const {
    for (int e : mesh_->nondesign_void()) field[e] = 0.0;
    for (int e : mesh_->nondesign_solid()) field[e] = 1.0;
}

void FieldChain::update(const Eigen::VectorXd& x, double beta) {
    if (x.size() != mesh_->num_elements()) {
        throw ParameterError(fmt::format("design field has {} entries, mesh has {} elements", x.size(),
                                         mesh_->num_elements()));
    }
    beta_ = beta;
    x_ = x;
    pin(x_);
    x_tilde_ = filter_->apply(x_);
    x_bar_ = project(x_tilde_, beta_);
    pin(x_bar_);
}

Eigen::VectorXd FieldChain::chain_gradient(const Eigen::VectorXd& df_dxbar) const {
    Eigen::VectorXd inner(df_dxbar.size());
    for (Eigen::Index e = 0; e < inner.size(); ++e) inner[e] = df_dxbar[e] * project_deriv(x_tilde_[e], beta_);
    for (int e : mesh_->nondesign_void()) inner[e] = 0.0;
    for (int e : mesh_->nondesign_solid()) inner[e] = 0.0;
    Eigen::VectorXd out = filter_->apply_transpose(inner);
    for (int e : mesh_->nondesign_void()) out[e] = 0.0;
    for (int e : mesh_->nondesign_solid()) out[e] = 0.0;
    return out;
}

} // namespace gravtop
