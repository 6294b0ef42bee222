#pragma once

#include <cstddef>
#include <optional>

#include "memflow/integrate.hpp"
#include "memflow/matrix.hpp"
#include "memflow/network.hpp"
#include "memflow/system.hpp"

namespace memflow {

// A long-horizon rollout.  Row m of `predicted` is the model state at time
// (n_M + 1 + m) * dt, continuing the warmup window.  When the rollout blows
// up it is truncated: `predicted` keeps only the finite rows and
// `truncated` is set, never an exception — long-horizon instability is a
// measured outcome, not a crash.
struct PredictionRun {
    Mat warmup;     // (n_M + 1) x n, oldest first
    Mat predicted;  // valid rows x n
    double dt = 0.0;
    size_t requested_steps = 0;
    bool truncated = false;
    std::optional<Mat> reference;  // truth aligned row-for-row with `predicted`

    size_t valid_steps() const { return predicted.rows; }
    // Time of predicted row m (the warmup occupies steps 0..n_M).
    double time_of(size_t m) const { return static_cast<double>(warmup.rows + m) * dt; }
};

// Applies the single-step forward block `steps` times with a sliding
// history.  Prediction depends only on the model and the warmup; it can
// never see system parameters.  States beyond the blow-up guard (or
// non-finite) truncate the run at the last valid row.
PredictionRun predict(const Model& model, const Mat& warmup, size_t steps);

// Integrates the TRUE system for n_M steps to produce the (n_M + 1) x n
// warmup window.  alpha is consumed here and never attached to the output:
// downstream consumers stay parameter-blind.
Mat make_warmup(const SystemSpec& spec, const std::vector<double>& x0,
                const std::vector<double>& alpha, int n_M, double dt, int substeps);

// Copies rows n_M+1 .. n_M+valid_steps of a reference trajectory next to
// the prediction (the trajectory must cover them).
void attach_reference(PredictionRun& run, const Trajectory& reference);

}  // namespace memflow
