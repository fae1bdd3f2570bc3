#include "gravtop/problems.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "gravtop/error.hpp"
#include "gravtop/fem.hpp"

namespace gravtop {

namespace {

NodeSelector at(double x, double y, double z = 0.0) { return {Box{{x, y, z}, {x, y, z}}}; }

NodeSelector span(Point lo, Point hi) { return {Box{lo, hi}}; }

FixedSupport clamp(NodeSelector where) { return {where, {true, true, true}}; }

ProblemSpec arch2d(int nx, int ny) {
    ProblemSpec p;
    p.mesh.dim = 2;
    p.mesh.nel = {nx, ny, 1};
    p.mesh.lengths = {2.0, 1.0, 1.0};
    p.mesh.thickness = 0.01;
    p.boundary.supports = {clamp(at(0.0, 0.0)), clamp(at(2.0, 0.0))};
    p.kappa = 0.0;
    p.vf_star = 0.25;
    p.filter_mult = 2.5;
    p.mass.eta_g = 0.01;
    p.mass.beta_g = 8.0;
    p.move_limit = 0.1;
    return p;
}

} // namespace

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"arch2d_coarse", "arch2d_fine", "arch2d_400", "mbb_half",
                                                "tower2d",       "house_arch",  "arch3d",     "tower3d"};
    return names;
}

ProblemSpec builtin(const std::string& name) {
    ProblemSpec p;
    if (name == "arch2d_coarse") {
        p = arch2d(100, 50);
    } else if (name == "arch2d_fine") {
        p = arch2d(200, 100);
    } else if (name == "arch2d_400") {
        p = arch2d(400, 200);
        p.vf_star = 0.40;
        p.move_limit = 0.05;
        p.mass.eta_g = 0.1;
        p.filter_mult = 3.5;
    } else if (name == "mbb_half") {
        // Right half of the beam; the symmetry line is x = 0.
        p = arch2d(320, 160);
        p.boundary.supports = {{at(2.0, 0.0), {false, true, false}}};
        p.boundary.symmetry = {{0, 0.0}};
        p.boundary.loads = {{at(0.0, 1.0), {0.0, -1.0, 0.0}, 1.0}};
        p.load_rule = LoadRule::MaxSelfWeight;
        p.kappa = 1.0;
        p.filter_mult = 3.0;
        p.move_limit = 0.05;
    } else if (name == "tower2d") {
        // Left half of a 1 m x 2.5 m tower; the symmetry line is x = 0.5.
        p = arch2d(110, 550);
        p.mesh.lengths = {0.5, 2.5, 1.0};
        p.boundary.supports = {clamp(at(0.0, 0.0))};
        p.boundary.symmetry = {{0, 0.5}};
        p.boundary.loads = {{at(0.5, 2.5), {0.0, -1.0, 0.0}, 1.0}};
        p.load_rule = LoadRule::MaxSelfWeight;
        p.kappa = 1.0;
        p.filter_mult = 5.6;
        p.move_limit = 0.05;
    } else if (name == "house_arch") {
        p = arch2d(240, 240);
        p.mesh.lengths = {2.0, 2.0, 1.0};
        p.mesh.void_boxes = {Box{{0.125, 0.0, 0.0}, {1.875, 1.0, 0.0}}};
        p.boundary.supports = {clamp(span({0.0, 0.0, 0.0}, {0.125, 0.0, 0.0})),
                               clamp(span({1.875, 0.0, 0.0}, {2.0, 0.0, 0.0}))};
        p.vf_star = 0.40;
        p.filter_mult = 3.6;
        p.move_limit = 0.05;
    } else if (name == "arch3d") {
        // Half of a 2 x 1 x 1 m arch; the symmetry plane is x = 1.
        p.mesh.dim = 3;
        p.mesh.nel = {50, 50, 50};
        p.mesh.lengths = {1.0, 1.0, 1.0};
        p.mesh.thickness = 1.0;
        p.boundary.supports = {clamp(span({0.0, 0.0, 0.0}, {0.0, 1.0, 0.0}))};
        p.boundary.symmetry = {{0, 1.0}};
        p.kappa = 0.0;
        p.vf_star = 0.35;
        p.filter_mult = 4.8;
        p.mass.eta_g = 0.04;
        p.mass.beta_g = 12.0;
        p.move_limit = 0.05;
    } else if (name == "tower3d") {
        // Quarter of a 1 x 1 x 2.5 m tower; symmetry planes x = 0.5, y = 0.5.
        p.mesh.dim = 3;
        p.mesh.nel = {40, 40, 200};
        p.mesh.lengths = {0.5, 0.5, 2.5};
        p.mesh.thickness = 1.0;
        p.boundary.supports = {clamp(at(0.0, 0.0, 0.0))};
        p.boundary.symmetry = {{0, 0.5}, {1, 0.5}};
        p.boundary.loads = {{at(0.5, 0.5, 2.5), {0.0, 0.0, -1.0}, 1.0}};
        p.load_rule = LoadRule::MaxSelfWeight;
        p.kappa = 1.0;
        p.vf_star = 0.1;
        p.filter_mult = 2.0 * std::sqrt(3.0);
        p.mass.eta_g = 0.001;
        p.mass.beta_g = 8.0;
        p.move_limit = 0.05;
    } else {
        const auto& names = builtin_names();
        const std::string list = std::accumulate(std::next(names.begin()), names.end(), names.front(),
                                                 [](std::string a, const std::string& b) { return a + ", " + b; });
        throw ConfigError(fmt::format("unknown problem '{}'; valid names: {}", name, list));
    }
    p.name = name;
    return p;
}

void validate(const ProblemSpec& spec) {
    if (!(spec.vf_star > 0.0 && spec.vf_star < 1.0)) throw ConfigError("vf_star must be in (0, 1)");
    if (!(spec.filter_mult >= 1.0)) throw ConfigError("filter multiplier must be >= 1");
    if (!(spec.kappa >= 0.0) || !std::isfinite(spec.kappa)) throw ConfigError("kappa must be a finite value >= 0");
    if (!(spec.move_limit > 0.0 && spec.move_limit <= 1.0)) throw ConfigError("move limit must be in (0, 1]");
    if (!(spec.nu > 0.0 && spec.nu < 0.5)) throw ConfigError("Poisson's ratio must be in (0, 0.5)");
    spec.simp.validate();
    spec.mass.validate();
    for (const auto& load : spec.boundary.loads) {
        if (!std::isfinite(load.magnitude)) throw ConfigError("point-load magnitude must be finite");
    }
    if (!std::isfinite(load_scale(spec))) throw ConfigError("external load rule does not resolve to a finite value");
    // Geometry, boxes and selectors are checked against an actual mesh.
    const Mesh mesh = build_mesh(spec.mesh);
    const BoundaryConditions bc = resolve_boundary(mesh, resolved_boundary(spec));
    if (bc.fixed_dofs.empty()) throw ConfigError("no DOF is fixed; the problem admits rigid-body motion");
}

std::vector<std::string> warnings(const ProblemSpec& spec) {
    return mass_parameter_warnings(spec.mass, spec.vf_star, spec.simp.penalty);
}

double domain_volume(const MeshSpec& mesh) {
    const double v = mesh.lengths[0] * mesh.lengths[1];
    return mesh.dim == 2 ? v * mesh.thickness : v * mesh.lengths[2];
}

double filter_radius(const ProblemSpec& spec) {
    double h = 0.0;
    for (int a = 0; a < spec.mesh.dim; ++a) h = std::max(h, spec.mesh.lengths[a] / spec.mesh.nel[a]);
    return spec.filter_mult * h;
}

double load_scale(const ProblemSpec& spec) {
    const double weight = domain_volume(spec.mesh) * spec.mass.gamma_solid * std::abs(kGravity);
    switch (spec.load_rule) {
    case LoadRule::Absolute: return 1.0;
    case LoadRule::MaxSelfWeight: return weight * spec.vf_star;
    case LoadRule::TotalSelfWeight: return weight;
    }
    return 1.0;
}

BoundarySpec resolved_boundary(const ProblemSpec& spec) {
    BoundarySpec b = spec.boundary;
    const double scale = load_scale(spec);
    for (auto& load : b.loads) load.magnitude *= scale;
    return b;
}

const char* to_string(LoadRule rule) {
    switch (rule) {
    case LoadRule::Absolute: return "absolute";
    case LoadRule::MaxSelfWeight: return "max_self_weight";
    case LoadRule::TotalSelfWeight: return "total_self_weight";
    }
    return "absolute";
}

LoadRule load_rule_from_string(const std::string& s) {
    if (s == "absolute") return LoadRule::Absolute;
    if (s == "max_self_weight") return LoadRule::MaxSelfWeight;
    if (s == "total_self_weight") return LoadRule::TotalSelfWeight;
    throw ConfigError(fmt::format("unknown load rule '{}' (absolute, max_self_weight, total_self_weight)", s));
}

} // namespace gravtop
