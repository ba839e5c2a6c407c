#ifndef SPADESIM_EXPERIMENTS_HPP
#define SPADESIM_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spadesim/estimate.hpp"
#include "spadesim/information.hpp"
#include "spadesim/io.hpp"

namespace spadesim {

// Declarative description of one experiment run.  Serialized into the run
// manifest so any output can be reproduced byte-for-byte.
struct ExperimentSpec {
    int schema_version = 1;
    std::string experiment; // fisher-sweep | mse | moments | thermal | reconstruct

    std::string psf = "gaussian"; // gaussian | signum | csv:<path>
    double sigma = 0.5;
    double grid_half_width = 10.0;
    int grid_samples = 4096;

    std::string scene = "two-point"; // two-point | uniform | points | csv:<path>
    double separation = 0.2;
    double centroid = 0.0;
    std::vector<double> scene_positions;
    std::vector<double> scene_weights;

    std::vector<double> theta_grid;
    std::vector<double> delta_grid;
    std::vector<double> epsilon_grid;
    std::vector<double> photon_grid;

    int modes = 12;
    int truncation = 16;
    int trials = 1000;
    int max_order = 6;            // reconstruction order
    double reference_sigma = 0.2; // reconstruction reference width
    double photons = 1e4;

    uint64_t seed = 12345;
    std::string output_dir = ".";

    static ExperimentSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    // key=value with the same keys as the JSON spec; numbers and
    // comma-separated lists are parsed by value
    void apply_override(const std::string& assignment);

    Psf build_psf() const;
    SourceScene build_scene() const;
};

struct ExperimentResult {
    io::Table table;
    nlohmann::json summary; // empty when the experiment has no extra summary
    std::vector<std::string> output_files;
};

ExperimentResult run_fisher_sweep(const ExperimentSpec& spec);
ExperimentResult run_mse_montecarlo(const ExperimentSpec& spec);
ExperimentResult run_moment_scaling(const ExperimentSpec& spec);
ExperimentResult run_thermal_limit(const ExperimentSpec& spec);
ExperimentResult run_reconstruct(const ExperimentSpec& spec);

// dispatch on spec.experiment, write CSV/summary/manifest into
// spec.output_dir, return the in-memory result
ExperimentResult run_experiment(const ExperimentSpec& spec);

// re-run the spec recorded in a manifest; output_dir (when given) replaces
// the recorded one, everything else is reproduced exactly
ExperimentResult rerun_from_manifest(const std::string& manifest_path,
                                     const std::optional<std::string>& output_dir = {});

} // namespace spadesim

#endif
