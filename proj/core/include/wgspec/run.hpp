#ifndef WGSPEC_RUN_HPP
#define WGSPEC_RUN_HPP

#include "wgspec/config.hpp"
#include "wgspec/fem.hpp"

#include <string>
#include <vector>

namespace wgspec {

struct RunResult {
    std::vector<std::string> files_written;
    std::string summary; // one-line human-readable outcome
};

/// Executes the configured pipeline and writes the outputs plus a run
/// manifest into config.directory. Throws ConfigError / SolverError /
/// ResourceError; the CLI maps these to exit codes 2 / 3 / 4.
RunResult run(const RunConfig& config);

/// Builds the geometry (profiles from expressions or sample files).
WaveguideGeometry geometry_from_config(const RunConfig& config);

/// Builds the cross-section mesh.
Mesh mesh_from_config(const RunConfig& config);

/// Builds the coefficient field. For kind=periodic_cell the field is a
/// function of the cell variable y; for kind=cross_section of x.
ScalarField coefficient_from_config(const RunConfig& config);

} // namespace wgspec

#endif
