#pragma once

#include <string>

#include "homog/convergence.hpp"

namespace homog {

/// Write-temp-then-rename; partial files never land on the final path.
void atomic_write(const std::string& path, const std::string& content);

std::string ladder_csv(const ConvergenceReport& report);

/// Full JSON report for a ladder run. Timing lives only in keys named
/// "seconds" so determinism comparisons can strip them.
std::string report_json(const ConvergenceReport& report, const std::string& config_path);

/// One value per line with a small header; the exchange format of GridField.
std::string grid_field_text(const GridField& g);

/// Environment text format with an extra eps header line.
std::string generator_dump(const Environment& env, double eps);

}  // namespace homog
