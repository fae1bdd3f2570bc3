#pragma once

#include <string>
#include <vector>

#include "gravtop/optimizer.hpp"
#include "gravtop/problems.hpp"

namespace gravtop {

/// Everything a single run needs: the fully resolved problem plus the loop,
/// solver and output settings. Serialized as JSON; see docs/config.md.
struct RunConfig {
    ProblemSpec problem;
    RunOptions options;
    std::string output_dir = "out";
    int every = 0;           ///< snapshot cadence for density_###.field, 0 = none
    double threshold = 0.90; ///< solid mask level for volumetric export

    bool operator==(const RunConfig&) const = default;
};

/// A config document with the problem given either by builtin name or
/// inline, optionally followed by an `overrides` object merged onto it.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Writes the resolved config (problem always inline). parse_config of the
/// result reproduces the same RunConfig.
std::string dump_config(const RunConfig& config);

/// A config for a builtin problem with default settings.
RunConfig default_config(const std::string& problem_name);

/// Applies `key=value` assignments. The key is a dotted path; paths whose
/// first segment is run, solver, continuation, mma, projection or output
/// address settings, anything else addresses the problem. The value is
/// parsed as JSON when possible and taken as a string otherwise. The result
/// is re-validated, so a wrongly typed value raises ConfigError.
RunConfig apply_overrides(const RunConfig& config, const std::vector<std::string>& assignments);

std::string problem_to_json(const ProblemSpec& spec);
ProblemSpec problem_from_json(const std::string& json_text);

} // namespace gravtop
