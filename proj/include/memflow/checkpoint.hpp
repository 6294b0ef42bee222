#pragma once

#include <cstdint>
#include <filesystem>

#include "memflow/adam.hpp"
#include "memflow/network.hpp"

namespace memflow {

// Everything needed to run (and optionally to keep training) a model.
// A checkpoint is self-contained: configuration, parameters, input
// standardization statistics, and the optimizer moments if requested.
struct Checkpoint {
    ModelConfig config;
    NetworkParams params;
    Normalization norm;  // disabled (empty) unless training standardized inputs
    bool has_opt_state = false;
    AdamState opt;  // meaningful only when has_opt_state
    uint64_t epoch = 0;       // completed training epochs at save time
    double train_loss = 0.0;  // full-dataset loss of these parameters
    uint64_t seed = 0;        // master seed of the producing run
};

// ---------------------------------------------------------------------------
// "MFC1" checkpoint file:
//   line 1: "MFC1"
//   line 2: one-line JSON header: config echo (activation, dt,
//           hidden_widths, n, n_mem, n_rec), layer shapes, epoch,
//           train_loss, seed, has_norm / has_opt_state flags, optimizer
//           step counters, tool version.  No timestamps: identical runs
//           must produce byte-identical files.
//   then, little-endian float64 blobs in declaration order:
//           W[0..L-1], b[0..L-1], [norm mean, stdev],
//           [opt m.W, m.b, v.W, v.b].
// ---------------------------------------------------------------------------
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// The runnable part of a checkpoint.
Model to_model(const Checkpoint& ckpt);

}  // namespace memflow
