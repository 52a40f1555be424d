#pragma once

/// Declarative experiment configuration: one JSON document drives every
/// subcommand of the command-line tool.  Parsing materializes all defaults,
/// so parse -> serialize -> parse is the identity on the parsed value.
///
/// Schema (all blocks optional unless noted; defaults in parentheses):
///   cell: { h, K, m, c, delta, [second_pair: {m_prime, c_prime}] }
///         All five scalar fields are required when the block is present;
///         delta is a number (real) or {re, im}.  When the block is absent
///         the default cell (h=0.01, K=1, m=1, c=0.5, delta=0.1i) is used.
///   omega: number, or {start, stop, count} for sweeps (1.0)
///   h_list: decreasing spacings for convergence studies ([0.02, 0.01, 0.005])
///   sample: { nx, ny } half-extents of finite samples (5 x 5)
///   k_path: list of [k1, k2] (axis sweep with |k| h up to 0.05)
///   resonator: { m_shell (1), m_core (1), k_total (1), gamma (0),
///                design_targets: list of {re, im} ([]) }
///   perturbation: { epsilon: number or list ([1e-4, 1e-3, 1e-2]),
///                   trials (20), seed (42) }
///   threads: worker count for sweeps (1)
///   output_dir: where reports are written ("out")
///
/// Any unknown key and any malformed field raises ConfigError with the
/// dotted path of the offending field.

#include <string>
#include <vector>

#include <json.hpp>

#include "willis/resonator.hpp"
#include "willis/types.hpp"

namespace willis {

struct OmegaSpec {
    double start = 1.0;
    double stop = 1.0;
    int count = 1;

    double scalar() const { return start; }
    std::vector<double> values() const;
};

struct ExperimentConfig {
    CellParams cell;
    OmegaSpec omega;
    std::vector<double> h_list = {0.02, 0.01, 0.005};
    int nx = 5;
    int ny = 5;
    std::vector<Eigen::Vector2d> k_path;
    ResonatorParams resonator;
    std::vector<cplx> design_targets;
    std::vector<double> epsilons = {1e-4, 1e-3, 1e-2};
    int trials = 20;
    std::uint64_t seed = 42;
    int threads = 1;
    std::string output_dir = "out";

    /// Re-checks every invariant, throwing ConfigError with a field path.
    void validate() const;
};

/// Parses and validates a configuration document, materializing defaults.
ExperimentConfig parse_config(const nlohmann::ordered_json& doc);

/// Reads a JSON file and parses it.  File-level problems (unreadable path,
/// malformed JSON) are reported as ConfigError on the pseudo-field "config".
ExperimentConfig load_config_file(const std::string& path);

/// Serializes the materialized configuration; parse_config(to_json(c)) == c.
nlohmann::ordered_json to_json(const ExperimentConfig& config);

bool operator==(const OmegaSpec& a, const OmegaSpec& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace willis
