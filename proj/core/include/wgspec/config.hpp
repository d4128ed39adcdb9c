#ifndef WGSPEC_CONFIG_HPP
#define WGSPEC_CONFIG_HPP

#include "wgspec/geometry.hpp"

#include <string>
#include <vector>

namespace wgspec {

/// Validated run configuration. Parsed from a TOML document (the subset
/// described in the README: sections, scalar/string/bool values, number
/// arrays, nested arrays for polygon vertices, # comments).
struct RunConfig {
    // [geometry]
    double l = 1.0;
    std::string k = "0";
    std::string alpha = "0";
    std::string theta = "0";
    std::string k_file, alpha_file, theta_file; // sampled-profile alternative
    int n_samples = 257;

    // [cross_section]
    std::string domain = "unit_square"; // unit_square | disk | polygon
    double radius = 1.0;
    std::vector<Vec2> vertices;
    int resolution = 64;
    std::string order = "P2"; // P1 | P2

    // [coefficient]
    std::string kind; // periodic_cell | cross_section
    std::string expr;
    std::string grid_file;
    int cell_resolution = 64;

    // [run]
    std::string mode; // homogenize | effective | localize | verify | oracle
    int eigenpairs = 6;
    std::vector<double> scales;
    std::string verify_case = "beta_only"; // beta_only | homogenize_only | combined
    double s = 0.25;                       // evaluation arclength for studies
    int oracle_ns = 96;
    int oracle_nx = 24;
    double concentration_s0 = -1.0; // >= 0 enables the oracle moment report

    // [output]
    std::string directory = "out";
    std::vector<std::string> formats{"json"};
};

/// Parses and validates a TOML document. Unknown keys are rejected;
/// mode-specific required fields are checked before any solve. Errors carry
/// line/column positions. `mode_override` (the CLI subcommand) replaces
/// run.mode before validation and stands in when the key is absent.
RunConfig parse_config(const std::string& toml_text, const std::string& mode_override = "");

/// Emits the configuration in the same TOML subset;
/// parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const RunConfig& config);

/// 64-bit FNV-1a of the serialized config (the run-manifest hash carried by
/// every output file).
std::string config_hash(const RunConfig& config);

} // namespace wgspec

#endif
