#include "gravtop/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "gravtop/error.hpp"

namespace gravtop {

namespace {

bool contains(const Box& box, const Point& p, int dim, double tol) {
    for (int a = 0; a < dim; ++a) {
        if (p[a] < box.lo[a] - tol || p[a] > box.hi[a] + tol) return false;
    }
    return true;
}

void check_box(const Box& box, const MeshSpec& spec, const char* what) {
    const double tol = 1e-9 * *std::max_element(spec.lengths.begin(), spec.lengths.begin() + spec.dim);
    for (int a = 0; a < spec.dim; ++a) {
        if (!(box.lo[a] <= box.hi[a])) {
            throw ConfigError(fmt::format("{} box has lo > hi on axis {}", what, a));
        }
        if (box.lo[a] < -tol || box.hi[a] > spec.lengths[a] + tol) {
            throw ConfigError(fmt::format("{} box [{}, {}] on axis {} lies outside the domain [0, {}]", what,
                                          box.lo[a], box.hi[a], a, spec.lengths[a]));
        }
    }
}

} // namespace

Mesh Mesh::build(const MeshSpec& spec) {
    if (spec.dim != 2 && spec.dim != 3) {
        throw ConfigError(fmt::format("mesh dimension must be 2 or 3, got {}", spec.dim));
    }
    for (int a = 0; a < spec.dim; ++a) {
        if (spec.nel[a] < 1) throw ConfigError(fmt::format("element count on axis {} must be >= 1", a));
        if (!(spec.lengths[a] > 0.0) || !std::isfinite(spec.lengths[a])) {
            throw ConfigError(fmt::format("domain length on axis {} must be > 0", a));
        }
    }
    if (spec.dim == 2 && !(spec.thickness > 0.0)) throw ConfigError("thickness must be > 0 in 2D");
    for (const auto& b : spec.void_boxes) check_box(b, spec, "non-design void");
    for (const auto& b : spec.solid_boxes) check_box(b, spec, "non-design solid");

    Mesh m;
    m.dim_ = spec.dim;
    m.nel_ = spec.nel;
    m.lengths_ = spec.lengths;
    if (m.dim_ == 2) {
        m.nel_[2] = 1;
        m.lengths_[2] = spec.thickness;
        m.thickness_ = spec.thickness;
    } else {
        m.thickness_ = 1.0;
    }
    m.num_elements_ = m.nel_[0] * m.nel_[1] * (m.dim_ == 3 ? m.nel_[2] : 1);
    m.num_nodes_ = (m.nel_[0] + 1) * (m.nel_[1] + 1) * (m.dim_ == 3 ? m.nel_[2] + 1 : 1);
    m.volume_ = m.lengths_[0] * m.lengths_[1] * m.lengths_[2];

    const int npe = m.nodes_per_element();
    const int dpe = m.dofs_per_element();
    m.connectivity_.resize(static_cast<std::size_t>(m.num_elements_) * npe);
    m.dof_map_.resize(static_cast<std::size_t>(m.num_elements_) * dpe);

    // local node offsets (di, dj, dk), counter-clockwise then top face
    static constexpr int offsets[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                          {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    for (int e = 0; e < m.num_elements_; ++e) {
        const auto [i, j, k] = m.element_ijk(e);
        for (int a = 0; a < npe; ++a) {
            const int n = m.node_index(i + offsets[a][0], j + offsets[a][1], k + offsets[a][2]);
            m.connectivity_[static_cast<std::size_t>(e) * npe + a] = n;
            for (int d = 0; d < m.dim_; ++d) {
                m.dof_map_[static_cast<std::size_t>(e) * dpe + a * m.dim_ + d] = n * m.dim_ + d;
            }
        }
    }

    m.roles_.assign(m.num_elements_, ElementRole::Design);
    for (int e = 0; e < m.num_elements_; ++e) {
        const Point c = m.centroid(e);
        const bool in_void = std::any_of(spec.void_boxes.begin(), spec.void_boxes.end(),
                                         [&](const Box& b) { return contains(b, c, m.dim_, 0.0); });
        const bool in_solid = std::any_of(spec.solid_boxes.begin(), spec.solid_boxes.end(),
                                          [&](const Box& b) { return contains(b, c, m.dim_, 0.0); });
        if (in_void && in_solid) {
            throw ConfigError(fmt::format("element {} lies in both a void and a solid non-design box", e));
        }
        if (in_void) {
            m.roles_[e] = ElementRole::Void;
            m.void_elements_.push_back(e);
        } else if (in_solid) {
            m.roles_[e] = ElementRole::Solid;
            m.solid_elements_.push_back(e);
        } else {
            m.design_elements_.push_back(e);
        }
    }

    const int ncolors = m.dim_ == 2 ? 4 : 8;
    m.colors_.assign(ncolors, {});
    for (int e = 0; e < m.num_elements_; ++e) {
        const auto [i, j, k] = m.element_ijk(e);
        m.colors_[(i % 2) + 2 * (j % 2) + 4 * (k % 2)].push_back(e);
    }
    std::erase_if(m.colors_, [](const auto& c) { return c.empty(); });
    return m;
}

Mesh build_mesh(const MeshSpec& spec) { return Mesh::build(spec); }

double Mesh::max_element_size() const {
    double h = 0.0;
    for (int a = 0; a < dim_; ++a) h = std::max(h, element_size(a));
    return h;
}

int Mesh::node_index(int i, int j, int k) const {
    return i + (nel_[0] + 1) * (j + (nel_[1] + 1) * k);
}

int Mesh::element_index(int i, int j, int k) const { return i + nel_[0] * (j + nel_[1] * k); }

std::array<int, 3> Mesh::element_ijk(int e) const {
    const int i = e % nel_[0];
    const int rest = e / nel_[0];
    return {i, rest % nel_[1], rest / nel_[1]};
}

std::array<int, 3> Mesh::node_ijk(int n) const {
    const int nx = nel_[0] + 1;
    const int ny = nel_[1] + 1;
    const int i = n % nx;
    const int rest = n / nx;
    return {i, rest % ny, rest / ny};
}

Point Mesh::node_coords(int n) const {
    const auto [i, j, k] = node_ijk(n);
    return {i * element_size(0), j * element_size(1), dim_ == 3 ? k * element_size(2) : 0.0};
}

Point Mesh::centroid(int e) const {
    const auto [i, j, k] = element_ijk(e);
    return {(i + 0.5) * element_size(0), (j + 0.5) * element_size(1),
            dim_ == 3 ? (k + 0.5) * element_size(2) : 0.0};
}

std::span<const int> Mesh::element_nodes(int e) const {
    const int npe = nodes_per_element();
    return {connectivity_.data() + static_cast<std::size_t>(e) * npe, static_cast<std::size_t>(npe)};
}

std::span<const int> Mesh::element_dofs(int e) const {
    const int dpe = dofs_per_element();
    return {dof_map_.data() + static_cast<std::size_t>(e) * dpe, static_cast<std::size_t>(dpe)};
}

double selector_tolerance(const Mesh& mesh) {
    double l = 0.0;
    for (int a = 0; a < mesh.dim(); ++a) l = std::max(l, mesh.length(a));
    return 1e-9 * l;
}

std::vector<int> select_nodes(const Mesh& mesh, const NodeSelector& sel) {
    const double tol = selector_tolerance(mesh);
    // Only scan the index range that can intersect the box.
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{0, 0, 0};
    for (int a = 0; a < mesh.dim(); ++a) {
        const double h = mesh.element_size(a);
        lo[a] = std::max(0, static_cast<int>(std::floor((sel.region.lo[a] - tol) / h)) - 1);
        hi[a] = std::min(mesh.nel(a), static_cast<int>(std::ceil((sel.region.hi[a] + tol) / h)) + 1);
    }
    std::vector<int> nodes;
    for (int k = lo[2]; k <= hi[2]; ++k) {
        for (int j = lo[1]; j <= hi[1]; ++j) {
            for (int i = lo[0]; i <= hi[0]; ++i) {
                const int n = mesh.node_index(i, j, k);
                if (contains(sel.region, mesh.node_coords(n), mesh.dim(), tol)) nodes.push_back(n);
            }
        }
    }
    return nodes;
}

BoundaryConditions resolve_boundary(const Mesh& mesh, const BoundarySpec& spec) {
    const int dim = mesh.dim();
    BoundaryConditions bc;
    bc.f_ext = Eigen::VectorXd::Zero(mesh.num_dofs());

    for (std::size_t s = 0; s < spec.supports.size(); ++s) {
        const auto nodes = select_nodes(mesh, spec.supports[s].where);
        if (nodes.empty()) throw ConfigError(fmt::format("support selector #{} matches no node", s));
        for (int n : nodes) {
            for (int d = 0; d < dim; ++d) {
                if (spec.supports[s].fix[d]) bc.fixed_dofs.push_back(n * dim + d);
            }
        }
    }

    for (std::size_t s = 0; s < spec.symmetry.size(); ++s) {
        const auto& face = spec.symmetry[s];
        if (face.axis < 0 || face.axis >= dim) {
            throw ConfigError(fmt::format("symmetry face #{} has invalid axis {}", s, face.axis));
        }
        NodeSelector sel;
        for (int a = 0; a < 3; ++a) {
            sel.region.lo[a] = 0.0;
            sel.region.hi[a] = mesh.length(a);
        }
        sel.region.lo[face.axis] = face.position;
        sel.region.hi[face.axis] = face.position;
        const auto nodes = select_nodes(mesh, sel);
        if (nodes.empty()) throw ConfigError(fmt::format("symmetry face #{} matches no node", s));
        for (int n : nodes) bc.fixed_dofs.push_back(n * dim + face.axis);
    }

    for (std::size_t s = 0; s < spec.loads.size(); ++s) {
        const auto& load = spec.loads[s];
        const auto nodes = select_nodes(mesh, load.where);
        if (nodes.empty()) throw ConfigError(fmt::format("load selector #{} matches no node", s));
        double norm = 0.0;
        for (int d = 0; d < dim; ++d) norm += load.direction[d] * load.direction[d];
        norm = std::sqrt(norm);
        if (!(norm > 0.0)) throw ConfigError(fmt::format("load #{} has a zero direction vector", s));
        const double per_node = load.magnitude / static_cast<double>(nodes.size());
        for (int n : nodes) {
            for (int d = 0; d < dim; ++d) bc.f_ext[n * dim + d] += per_node * load.direction[d] / norm;
        }
    }

    std::sort(bc.fixed_dofs.begin(), bc.fixed_dofs.end());
    bc.fixed_dofs.erase(std::unique(bc.fixed_dofs.begin(), bc.fixed_dofs.end()), bc.fixed_dofs.end());
    return bc;
}

} // namespace gravtop
