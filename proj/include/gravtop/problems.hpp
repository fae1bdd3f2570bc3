#pragma once

#include <string>
#include <vector>

#include "gravtop/material.hpp"
#include "gravtop/mesh.hpp"

namespace gravtop {

/// How point-load magnitudes in the boundary spec are interpreted.
enum class LoadRule {
    Absolute,        ///< magnitudes are newtons
    MaxSelfWeight,   ///< magnitudes multiply V gamma_s vf_star |g|
    TotalSelfWeight, ///< magnitudes multiply V gamma_s |g|
};

/// A complete benchmark definition: geometry, supports, loads, material and
/// optimizer parameters. V is the volume of the modelled (possibly
/// symmetry-reduced) domain.
struct ProblemSpec {
    std::string name;
    MeshSpec mesh;
    BoundarySpec boundary;
    double kappa = 0.0;
    LoadRule load_rule = LoadRule::Absolute;
    double vf_star = 0.25;
    double filter_mult = 2.5; ///< filter radius = filter_mult * max element edge
    double nu = 0.3;
    SimpModel simp;
    MassDensityModel mass;
    double move_limit = 0.1;
    bool g2_enabled = true;

    bool operator==(const ProblemSpec&) const = default;
};

const std::vector<std::string>& builtin_names();

/// Throws ConfigError listing the valid names for an unknown name.
ProblemSpec builtin(const std::string& name);

/// Throws ConfigError on invalid values.
void validate(const ProblemSpec& spec);

/// Non-fatal advice (mass density parameter recommendation).
std::vector<std::string> warnings(const ProblemSpec& spec);

double domain_volume(const MeshSpec& mesh);
double filter_radius(const ProblemSpec& spec);

/// Factor applied to every point-load magnitude under the load rule.
double load_scale(const ProblemSpec& spec);

/// Boundary spec with point-load magnitudes converted to newtons.
BoundarySpec resolved_boundary(const ProblemSpec& spec);

const char* to_string(LoadRule rule);
LoadRule load_rule_from_string(const std::string& s);

} // namespace gravtop
