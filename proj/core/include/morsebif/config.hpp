#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "morsebif/bifurcation.hpp"
#include "morsebif/lagrangian.hpp"

namespace morsebif {

/// Run configuration parsed from the JSON config file.  The same config and
/// seed always produce byte-identical CSV output.
struct RunConfig {
    std::string family_name = "pendulum";
    std::map<std::string, double> family_params;
    int dim = 1;

    std::string boundary_type = "twist";
    BoundaryCondition boundary = OrthogonalTwist{Mat::Identity(1, 1)};

    double tau = 2.0 * M_PI;
    double lambda = 0.0;
    std::array<double, 2> lambda_range{-0.3, 0.3};
    int grid = 512;        ///< time cells, >= 32
    int lambda_grid = 101;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    int trials = 100;
    std::string out_dir;
    bool svg = false;
    bool refine = false;
    std::string branch = "zero";  ///< "zero" | "solve"
    Vec guess_q, guess_v;

    std::string canonical;  ///< canonical JSON dump, hashed into CSV headers
};

/// Parses and validates a config from JSON text (throws ConfigError).
RunConfig parse_config(const std::string& json_text);

RunConfig load_config_file(const std::string& path);

/// Canonical JSON text of a config; parse_config(canonical_text(c)) == c.
std::string canonical_text(const RunConfig& cfg);

/// Builds the named built-in family from the config
/// ("pendulum" {l, g} | "free" | "harmonic" {omega0, slope}).
LagrangianFamily make_family(const RunConfig& cfg);

}  // namespace morsebif
