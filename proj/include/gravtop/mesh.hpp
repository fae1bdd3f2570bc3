#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gravtop {

using Point = std::array<double, 3>;

/// Axis-aligned box in physical coordinates. In 2D the z extent is ignored.
struct Box {
    Point lo{0.0, 0.0, 0.0};
    Point hi{0.0, 0.0, 0.0};

    bool operator==(const Box&) const = default;
};

enum class ElementRole : std::uint8_t { Design, Void, Solid };

struct MeshSpec {
    int dim = 2;
    std::array<int, 3> nel{1, 1, 1};
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    double thickness = 1.0; ///< out-of-plane thickness, 2D only
    std::vector<Box> void_boxes;
    std::vector<Box> solid_boxes;

    bool operator==(const MeshSpec&) const = default;
};

/// Structured grid of equal rectangular (2D) or box (3D) elements.
///
/// Nodes and elements are numbered lexicographically with x fastest, then
/// y, then z. Element-local node order is counter-clockwise on the bottom
/// face, followed by the top face in 3D. DOF `d` of node `n` has global
/// index `n * dim + d`.
class Mesh {
public:
    /// Throws ConfigError on non-positive sizes or non-design boxes that do
    /// not lie inside the domain.
    static Mesh build(const MeshSpec& spec);

    int dim() const { return dim_; }
    int nel(int axis) const { return nel_[axis]; }
    double length(int axis) const { return lengths_[axis]; }
    double thickness() const { return thickness_; }
    double element_size(int axis) const { return lengths_[axis] / nel_[axis]; }
    double max_element_size() const;

    int num_elements() const { return num_elements_; }
    int num_nodes() const { return num_nodes_; }
    int num_dofs() const { return num_nodes_ * dim_; }
    int nodes_per_element() const { return dim_ == 2 ? 4 : 8; }
    int dofs_per_element() const { return nodes_per_element() * dim_; }

    /// Domain volume V (L_x L_y t in 2D) and element volume V_e = V / Nel.
    double volume() const { return volume_; }
    double element_volume() const { return volume_ / num_elements_; }

    int node_index(int i, int j, int k = 0) const;
    int element_index(int i, int j, int k = 0) const;
    std::array<int, 3> element_ijk(int e) const;
    std::array<int, 3> node_ijk(int n) const;

    Point node_coords(int n) const;
    Point centroid(int e) const;

    std::span<const int> element_nodes(int e) const;
    std::span<const int> element_dofs(int e) const;

    ElementRole role(int e) const { return roles_[e]; }
    const std::vector<ElementRole>& roles() const { return roles_; }
    const std::vector<int>& nondesign_void() const { return void_elements_; }
    const std::vector<int>& nondesign_solid() const { return solid_elements_; }

    /// Elements whose density is free for the optimizer, ascending.
    const std::vector<int>& design_elements() const { return design_elements_; }

    /// Partition of the elements into 2^dim groups such that no two elements
    /// in a group share a node. Used for race-free parallel scatter.
    const std::vector<std::vector<int>>& colors() const { return colors_; }

private:
    Mesh() = default;

    int dim_ = 2;
    std::array<int, 3> nel_{1, 1, 1};
    std::array<double, 3> lengths_{1.0, 1.0, 1.0};
    double thickness_ = 1.0;
    double volume_ = 1.0;
    int num_elements_ = 0;
    int num_nodes_ = 0;
    std::vector<int> connectivity_; // num_elements * nodes_per_element
    std::vector<int> dof_map_;      // num_elements * dofs_per_element
    std::vector<ElementRole> roles_;
    std::vector<int> void_elements_;
    std::vector<int> solid_elements_;
    std::vector<int> design_elements_;
    std::vector<std::vector<int>> colors_;
};

Mesh build_mesh(const MeshSpec& spec);

/// Nodes lying in `region` enlarged by `tol` on every side.
struct NodeSelector {
    Box region;

    bool operator==(const NodeSelector&) const = default;
};

struct FixedSupport {
    NodeSelector where;
    std::array<bool, 3> fix{true, true, true};

    bool operator==(const FixedSupport&) const = default;
};

/// Total magnitude is split equally over the matched nodes.
struct PointLoad {
    NodeSelector where;
    Point direction{0.0, -1.0, 0.0};
    double magnitude = 1.0;

    bool operator==(const PointLoad&) const = default;
};

/// Roller on the plane `coordinate[axis] == position`: the DOF normal to the
/// plane is fixed on every node of the plane.
struct SymmetryFace {
    int axis = 0;
    double position = 0.0;

    bool operator==(const SymmetryFace&) const = default;
};

struct BoundarySpec {
    std::vector<FixedSupport> supports;
    std::vector<PointLoad> loads;
    std::vector<SymmetryFace> symmetry;

    bool operator==(const BoundarySpec&) const = default;
};

struct BoundaryConditions {
    std::vector<int> fixed_dofs; ///< sorted, unique
    Eigen::VectorXd f_ext;       ///< full length, before kappa scaling
};

/// Selector tolerance used by resolve_boundary: 1e-9 * max(lengths).
double selector_tolerance(const Mesh& mesh);

std::vector<int> select_nodes(const Mesh& mesh, const NodeSelector& sel);

/// Throws ConfigError when a selector matches no node or a load direction is
/// degenerate.
BoundaryConditions resolve_boundary(const Mesh& mesh, const BoundarySpec& spec);

} // namespace gravtop
