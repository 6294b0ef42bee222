#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "memflow/adam.hpp"
#include "memflow/dataset.hpp"
#include "memflow/network.hpp"

namespace memflow {

struct TrainHyper {
    AdamConfig adam;
    int batch_size = 64;
    int epochs = 0;
    uint64_t seed = 0;
    bool shuffle = true;
    double val_fraction = 0.0;  // 0 = no held-out split
    bool normalize = false;     // standardize network inputs (stats go in the checkpoint)

    void validate() const;
};

struct EpochRecord {
    uint64_t epoch = 0;        // 0-based
    double train_loss = 0.0;   // training-set loss with the parameters at epoch start
    double val_loss = 0.0;     // held-out loss at epoch start (meaningful iff split on)
    double seconds = 0.0;      // wall time of this epoch's updates (informational only)
};

struct TrainRun {
    ModelConfig config;
    TrainHyper hyper;
    std::vector<EpochRecord> history;  // one record per completed-or-started epoch
    bool has_val = false;

    double final_loss = 0.0;  // training-set loss of `last` (after the final epoch)
    NetworkParams last;       // parameters after the final epoch (or last good ones)
    NetworkParams best;       // lowest training-set loss among all epoch boundaries
    double best_loss = 0.0;
    uint64_t best_epoch = 0;  // boundary index of `best`; `epochs` means after the run
    Normalization norm;
    AdamState opt;  // optimizer state matching `last`

    bool aborted = false;      // loss went non-finite; `last`/`best` hold the
    std::string abort_reason;  // most recent finite-loss parameters
};

using ProgressFn = std::function<void(const EpochRecord&)>;

// Mini-batch Adam over shuffled epochs.  Deterministic for a fixed
// (dataset, config, hyper): initialization, the validation split, and every
// epoch's shuffle come from seeds derived from hyper.seed.
//
// Loss bookkeeping: history[e].train_loss is the full training-set loss
// with the parameters as they stood at the START of epoch e, and final_loss
// evaluates the parameters after the last epoch, so a run makes epochs + 1
// loss measurements and `best` picks the minimum over all of them.
//
// When out_dir is non-empty the trainer maintains `last.mfc` and
// `best.mfc` checkpoints there (written atomically every epoch / on every
// improvement).  A non-finite loss aborts the run: the returned TrainRun
// has `aborted` set and carries the most recent finite-loss parameters.
//
// init_override, when given, replaces the seeded He initialization (shapes
// must match); tests use it to pin exact starting points.
TrainRun train(const Dataset& data, const ModelConfig& config, const TrainHyper& hyper,
               const std::filesystem::path& out_dir = {},
               const NetworkParams* init_override = nullptr,
               const ProgressFn& progress = nullptr);

// Writes "epoch,train_loss[,val_loss],seconds" rows; losses are printed
// with round-trip precision.  The seconds column is wall time and is the
// only part of a run's artifacts that may differ between identical runs.
void write_history_csv(const std::filesystem::path& path, const TrainRun& run);

namespace detail {
// Epoch-e visit order of the training indices (exposed for tests: the
// multiset must equal the training set exactly once, any epoch).
std::vector<size_t> epoch_order(const std::vector<size_t>& train_idx, uint64_t seed,
                                uint64_t epoch, bool shuffle);
}  // namespace detail

}  // namespace memflow
