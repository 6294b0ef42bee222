#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "memflow/predictor.hpp"
#include "memflow/trainer.hpp"

namespace memflow {

// Euclidean distance between prediction and reference at every predicted
// step; requires a reference attached to the run.
Vec l2_error_series(const PredictionRun& run);

// Half the peak-to-peak range of a signal window: 0 for a steady state, the
// oscillation amplitude for a limit cycle.  Translation-invariant and
// linear in signal scale.
double amplitude(const double* signal, size_t count);
double amplitude(const Vec& signal);

// --- Ensemble error ------------------------------------------------------

struct EnsembleReport {
    double t_eval = 0.0;  // evaluation time snapped to the step grid
    size_t k_eval = 0;    // global step index of t_eval
    int requested = 0;
    int completed = 0;
    int truncated = 0;        // blown-up runs, excluded from the mean
    double mean_error = 0.0;  // over completed runs (NaN when none complete)
    std::vector<double> run_errors;  // per run; NaN marks a truncated run
};

// Draws `runs` (x0, alpha) pairs (one derived stream per run), integrates
// the true system to t_eval, warms the model up with the first n_M + 1
// reference states, rolls the model out to t_eval, and averages the
// prediction error there over the runs that stayed finite.  Results are
// identical for any thread count.
EnsembleReport ensemble_error(const Model& model, const SystemSpec& spec, double t_eval,
                              int runs, uint64_t seed, int substeps, int threads);

void write_ensemble_csv(const std::filesystem::path& path, const EnsembleReport& report);

// --- Bifurcation amplitude scan ------------------------------------------

enum class ScanMode { Reference, Dnn, Both };

struct ScanPoint {
    double param = 0.0;  // scanned parameter value
    double x1_amplitude = 0.0;
    double x2_amplitude = 0.0;
    bool truncated = false;  // run blew up before the window closed
};

struct AmplitudeScan {
    std::vector<ScanPoint> reference;  // filled in Reference / Both modes
    std::vector<ScanPoint> dnn;        // filled in Dnn / Both modes
};

struct BifurcationConfig {
    std::vector<double> param_grid;  // strictly increasing scan values
    std::vector<double> x0;          // shared start state
    double dt = 0.0;
    double window_start = 50.0;  // amplitude window [start, end] in time units
    double window_end = 70.0;
    int substeps = 4;
    int threads = 1;
};

// For every grid value, runs the true system and/or the model (warmed up by
// the true system at that value, which stays hidden from the network) to
// the window end and records the amplitudes of the first two state
// components over the window.  `model` may be null in Reference mode.
AmplitudeScan bifurcation_scan(const SystemSpec& spec, ScanMode mode, const Model* model,
                               const BifurcationConfig& cfg);

void write_scan_csv(const std::filesystem::path& path, const AmplitudeScan& scan);

// --- Memory-depth sweep ----------------------------------------------------

struct SweepConfig {
    SystemId system = SystemId::Pendulum;
    std::vector<int> n_M_list;
    std::vector<int> n_R_list;
    std::vector<int> hidden_widths{30, 30, 30};
    double dt = 0.0;

    // data budget per combination
    size_t num_trajectories = 0;
    size_t traj_steps = 0;
    int substeps = 4;
    int samples_per_traj = 0;

    TrainHyper hyper;  // seed is ignored; per-combination seeds are derived

    double t_eval = 0.0;
    int ensemble_runs = 0;

    uint64_t master_seed = 0;
    int threads = 1;
};

struct SweepRow {
    int n_M = 0;
    int n_R = 0;
    double final_train_loss = 0.0;
    double mean_error = 0.0;  // ensemble mean (NaN when aborted / none complete)
    int completed = 0;
    int truncated = 0;
    bool aborted = false;
};

using SweepProgressFn = std::function<void(const SweepRow&)>;

// Trains one model per (n_M, n_R) combination under the same data and
// optimization budget, then measures its ensemble error.  Combination c
// (row-major over n_M x n_R) derives four seeds from the master seed:
// trajectory generation, window sampling, training, evaluation — so any
// subset of combinations reproduces bit-identically.
std::vector<SweepRow> memory_sweep(const SweepConfig& cfg,
                                   const SweepProgressFn& progress = nullptr);

void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);

}  // namespace memflow
