#pragma once

#include <stdexcept>
#include <string>

#include "homog/convergence.hpp"

namespace homog {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutputSpec {
    std::string dir = ".";
};

/// Parsed experiment description. Sections: [environment] (required),
/// [ladder], [solver], [output]. Unknown sections and keys are rejected with
/// the offending line.
struct RunConfig {
    ExperimentPlan plan;
    double L = 0.0;  // box side for single-box commands; 0 = derive from S and the smallest eps
    OutputSpec output;
    bool has_environment = false;
    bool has_ladder = false;
    bool has_solver = false;
    bool has_output = false;

    /// L for gen-env / palm / effective-matrix runs.
    double box_side() const;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig load_config(const std::string& path);

}  // namespace homog
