#pragma once

#include <filesystem>
#include <vector>

#include "memflow/integrate.hpp"
#include "memflow/matrix.hpp"
#include "memflow/rng.hpp"

namespace memflow {

// One training grouping: x_in is the history segment (n_M+1 consecutive
// states, oldest to newest), y_out the following n_R states.
struct TrainingSample {
    std::vector<double> x_in;   // n * (n_M + 1)
    std::vector<double> y_out;  // n * n_R
};

struct DatasetMeta {
    int n = 0;
    int n_M = 0;
    int n_R = 1;
    double dt = 0.0;
    uint64_t J = 0;  // sample count
    uint64_t source_seed = 0;

    int x_width() const { return n * (n_M + 1); }
    int y_width() const { return n * n_R; }
};

// Packed dataset: row j of x_in / y_out is sample j.  Sample identity is a
// flat index; trajectory origin is deliberately discarded.
struct Dataset {
    DatasetMeta meta;
    Mat x_in;   // J x n(n_M+1)
    Mat y_out;  // J x n*n_R
};

// Slices one sample out of a trajectory: x_in = rows k..k+n_M,
// y_out = rows k+n_M+1..k+n_M+n_R (bit-equal copies of the rows).
// Requires k + n_M + n_R <= K - 1.
TrainingSample window(const Trajectory& traj, size_t k, int n_M, int n_R);

struct BuildResult {
    Dataset dataset;
    size_t skipped_trajectories = 0;  // shorter than n_tot = n_M + n_R + 1
};

// For each admitted trajectory draws `samples_per_traj` start indices
// uniformly (with replacement, windows may overlap) from the trajectory's
// derived stream and windows them out.  J = samples_per_traj * admitted.
BuildResult build_training_set(const std::vector<Trajectory>& trajs, int n_M, int n_R,
                               int samples_per_traj, uint64_t seed);

// ---------------------------------------------------------------------------
// "MFD1" dataset file:
//   line 1: "MFD1"
//   line 2: one-line JSON header {"J":..,"dt":..,"n":..,"n_mem":..,
//            "n_rec":..,"seed":..,"tool":..}
//   then:   J * n(n_M+1) doubles (all x_in rows), followed by
//           J * n*n_R doubles (all y_out rows); little-endian float64.
// ---------------------------------------------------------------------------
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace memflow
