#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace memflow {

// Experiment settings shared by the command-line tools.  Every field is
// optional here; each subcommand checks that what it needs is present
// (after merging flag overrides on top).  Loaded from flat key=value files
// with `include = other.cfg` support.
struct ExperimentConfig {
    std::optional<std::string> system;

    // generation
    std::optional<size_t> gen_trajectories;  // generation.num_trajectories
    std::optional<size_t> gen_steps;         // generation.steps
    std::optional<double> dt;                // generation.dt
    std::optional<int> gen_substeps;         // generation.substeps
    std::optional<uint64_t> gen_seed;        // generation.seed

    // dataset
    std::optional<int> n_mem;             // dataset.n_mem
    std::optional<int> n_rec;             // dataset.n_rec
    std::optional<int> samples_per_traj;  // dataset.samples_per_traj
    std::optional<uint64_t> dataset_seed; // dataset.seed

    // model
    std::optional<std::vector<int>> widths;  // model.widths

    // training
    std::optional<double> lr;            // train.lr
    std::optional<int> batch;            // train.batch
    std::optional<int> epochs;           // train.epochs
    std::optional<uint64_t> train_seed;  // train.seed
    std::optional<double> val_fraction;  // train.val_fraction
    std::optional<bool> normalize;       // train.normalize

    // evaluation
    std::optional<double> t_eval;        // eval.t_eval
    std::optional<int> eval_runs;        // eval.runs
    std::optional<uint64_t> eval_seed;   // eval.seed
    std::optional<int> eval_substeps;    // eval.substeps

    // memory sweep grids
    std::optional<std::vector<int>> sweep_n_mem;  // sweep.n_mem_list
    std::optional<std::vector<int>> sweep_n_rec;  // sweep.n_rec_list

    // bifurcation scan
    std::optional<std::vector<double>> bif_grid;  // bifurcation.grid
    std::optional<std::vector<double>> bif_x0;    // bifurcation.x0
    std::optional<double> bif_window_start;       // bifurcation.window_start
    std::optional<double> bif_window_end;         // bifurcation.window_end
};

// Parses a config file.  Syntax: one `key = value` per line, '#' starts a
// comment, blank lines ignored.  `include = PATH` (relative to the
// including file) splices another file in place; later assignments win.
// Unknown keys and malformed values raise ConfigError naming the file and
// line.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Value parsers shared with the CLI (strict: reject trailing junk).
int parse_int(const std::string& text, const std::string& what);
size_t parse_size(const std::string& text, const std::string& what);
uint64_t parse_u64(const std::string& text, const std::string& what);
double parse_real(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);
std::vector<int> parse_int_list(const std::string& text, const std::string& what);
// Accepts "a,b,c" or an inclusive range "lo:step:hi".
std::vector<double> parse_real_list(const std::string& text, const std::string& what);

}  // namespace memflow
