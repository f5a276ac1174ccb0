#pragma once
//
// Experiment configuration: a plain JSON document describing the domain, the
// boundary datum, the vortex list, mesh resolution, the exponent schedule and
// solver knobs.  Parsing fills every omitted field with its default so that a
// resolved config round-trips losslessly: parse(serialize(c)) == c, field for
// field, digit for digit (floats are printed with 17 significant digits).
//
// Validation happens before any solve and reports offending entries by index
// ("vortex 2 ..."), throwing ConfigError subclasses only.

#include "vlab/geom.hpp"
#include "vlab/mesh.hpp"
#include "vlab/pharmonic.hpp"
#include "vlab/stationary.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vlab {

struct StressSpec {
    double delta = 0.15;                        // cutoff radius for coefficients
    std::vector<double> deltas = {0.1, 0.15, 0.2}; // radii for the spread check
};

struct StationarySpec {
    StationaryParams params;
    bool certify = false;   // compare deg(c(p,.)) against deg(grad W)
    double cert_radius = 0.1;
    double cert_p = 0.0;    // <= 0: coarsest schedule entry
    int cert_n_theta = 10;
    int cert_disk_rings = 1;
};

struct SweepSpec {
    int grid = 3;         // grid x grid offsets around the first vortex
    double extent = 0.1;  // offsets fill [-extent, extent]^2
};

struct ExperimentConfig {
    Domain domain;
    BoundaryDatum datum;
    std::vector<Vec2> vortex_points;
    std::vector<int> vortex_degrees;
    MeshParams mesh;
    std::vector<double> p_schedule = {1.9, 1.95, 1.975};
    PSolveParams solver;
    StressSpec stress;
    StationarySpec stationary;
    SweepSpec sweep;
    std::string out_dir = "out";
    std::uint64_t seed = 20260815;

    VortexConfig vortices() const { return {vortex_points, vortex_degrees}; }
    MapProblem problem() const;
};

// JSON text <-> config.  parse_config throws InvalidConfig on malformed input;
// the result is fully resolved (all defaults filled).
ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path); // InvalidConfig if unreadable

// Full pre-solve validation; throws ConfigError subclasses naming the
// offending entry (vortex index, schedule position, ...).
void validate_config(const ExperimentConfig& cfg);

} // namespace vlab
