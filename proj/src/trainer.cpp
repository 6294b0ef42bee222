#include "memflow/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "memflow/checkpoint.hpp"
#include "memflow/errors.hpp"
#include "memflow/io_util.hpp"
#include "memflow/rng.hpp"

namespace memflow {

void TrainHyper::validate() const {
    adam.validate();
    require(batch_size >= 1, "train: batch_size must be >= 1");
    require(epochs >= 0, "train: epochs must be >= 0");
    require(val_fraction >= 0.0 && val_fraction < 1.0,
            "train: val_fraction must lie in [0, 1)");
}

namespace {

// Seed-stream layout for one training run: index 0 initializes the
// parameters, index 1 draws the validation split, index 2 + e shuffles
// epoch e.
constexpr uint64_t kInitStream = 0;
constexpr uint64_t kSplitStream = 1;
constexpr uint64_t kEpochStreamBase = 2;

void fisher_yates(std::vector<size_t>& v, RngStream& stream) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(stream.uniform_index(i));
        std::swap(v[i - 1], v[j]);
    }
}

struct CheckpointSink {
    std::filesystem::path dir;
    const ModelConfig* config = nullptr;
    const Normalization* norm = nullptr;
    uint64_t seed = 0;

    bool enabled() const { return !dir.empty(); }

    void write_last(const NetworkParams& params, const AdamState& opt, uint64_t epoch,
                    double loss) const {
        if (!enabled()) return;
        Checkpoint c;
        c.config = *config;
        c.params = params;
        c.norm = *norm;
        c.has_opt_state = true;
        c.opt = opt;
        c.epoch = epoch;
        c.train_loss = loss;
        c.seed = seed;
        save_checkpoint(dir / "last.mfc", c);
    }

    void write_best(const NetworkParams& params, uint64_t epoch, double loss) const {
        if (!enabled()) return;
        Checkpoint c;
        c.config = *config;
        c.params = params;
        c.norm = *norm;
        c.has_opt_state = false;
        c.epoch = epoch;
        c.train_loss = loss;
        c.seed = seed;
        save_checkpoint(dir / "best.mfc", c);
    }
};

}  // namespace

namespace detail {

std::vector<size_t> epoch_order(const std::vector<size_t>& train_idx, uint64_t seed,
                                uint64_t epoch, bool shuffle) {
    std::vector<size_t> order = train_idx;
    if (shuffle) {
        RngStream stream = derive_stream(seed, kEpochStreamBase + epoch);
        fisher_yates(order, stream);
    }
    return order;
}

}  // namespace detail

TrainRun train(const Dataset& data, const ModelConfig& config, const TrainHyper& hyper,
               const std::filesystem::path& out_dir, const NetworkParams* init_override,
               const ProgressFn& progress) {
    config.validate();
    hyper.validate();
    require(data.meta.n == config.n && data.meta.n_M == config.n_M &&
                data.meta.n_R == config.n_R,
            "train: dataset (n, n_M, n_R) does not match the model config");
    require(data.meta.dt == config.dt, "train: dataset dt does not match the model config");
    require(data.meta.J >= 1 && data.x_in.rows == data.meta.J &&
                data.y_out.rows == data.meta.J,
            "train: dataset is empty or inconsistent");

    const size_t J = data.meta.J;

    // Validation split: a seeded permutation donates its head to the
    // held-out set; both sets then go back to ascending order so the split
    // only decides membership, never the visit order.
    std::vector<size_t> train_idx, val_idx;
    {
        std::vector<size_t> perm(J);
        for (size_t i = 0; i < J; ++i) perm[i] = i;
        const size_t val_count =
            static_cast<size_t>(std::floor(static_cast<double>(J) * hyper.val_fraction));
        if (val_count > 0) {
            RngStream stream = derive_stream(hyper.seed, kSplitStream);
            fisher_yates(perm, stream);
        }
        val_idx.assign(perm.begin(), perm.begin() + static_cast<long>(val_count));
        train_idx.assign(perm.begin() + static_cast<long>(val_count), perm.end());
        std::sort(val_idx.begin(), val_idx.end());
        std::sort(train_idx.begin(), train_idx.end());
    }
    require(!train_idx.empty(), "train: validation split leaves no training samples");

    TrainRun run;
    run.config = config;
    run.hyper = hyper;
    run.has_val = !val_idx.empty();

    if (hyper.normalize)
        run.norm = fit_normalization(data.x_in, config.n, train_idx.data(),
                                     train_idx.size());

    if (init_override != nullptr) {
        NetworkParams expect = make_params(config);
        require(expect.same_shape(*init_override),
                "train: init_override shapes do not match the config");
        run.last = *init_override;
    } else {
        run.last = init_params(config, derive_seed(hyper.seed, kInitStream));
    }
    run.opt = make_adam_state(config);

    CheckpointSink sink{out_dir, &config, &run.norm, hyper.seed};
    if (sink.enabled()) std::filesystem::create_directories(out_dir);

    run.best_loss = std::numeric_limits<double>::infinity();
    // Most recent parameters whose full training loss came out finite;
    // these survive an abort.
    NetworkParams last_good = run.last;
    AdamState last_good_opt = run.opt;
    double last_good_loss = std::numeric_limits<double>::quiet_NaN();

    auto eval_train = [&]() {
        return batch_loss(config, run.last, run.norm, data.x_in, data.y_out,
                          train_idx.data(), train_idx.size());
    };
    auto eval_val = [&]() {
        return batch_loss(config, run.last, run.norm, data.x_in, data.y_out,
                          val_idx.data(), val_idx.size());
    };

    auto note_boundary = [&](uint64_t boundary, double loss) {
        // A finite full-set evaluation: refresh abort fallback, best and
        // the on-disk checkpoints.
        last_good = run.last;
        last_good_opt = run.opt;
        last_good_loss = loss;
        if (loss < run.best_loss) {
            run.best = run.last;
            run.best_loss = loss;
            run.best_epoch = boundary;
            sink.write_best(run.best, boundary, loss);
        }
        sink.write_last(run.last, run.opt, boundary, loss);
    };

    bool stop = false;
    for (int e = 0; e < hyper.epochs && !stop; ++e) {
        const double train_loss = eval_train();
        if (!std::isfinite(train_loss)) {
            run.aborted = true;
            run.abort_reason = msgf("non-finite training loss at epoch %d", e);
            break;
        }
        note_boundary(static_cast<uint64_t>(e), train_loss);

        EpochRecord rec;
        rec.epoch = static_cast<uint64_t>(e);
        rec.train_loss = train_loss;
        if (run.has_val) rec.val_loss = eval_val();

        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<size_t> order =
            detail::epoch_order(train_idx, hyper.seed, static_cast<uint64_t>(e),
                                hyper.shuffle);
        for (size_t pos = 0; pos < order.size(); pos += hyper.batch_size) {
            const size_t b = std::min(static_cast<size_t>(hyper.batch_size),
                                      order.size() - pos);
            LossGrad g = grad_loss(config, run.last, run.norm, data.x_in, data.y_out,
                                   order.data() + pos, b);
            if (!std::isfinite(g.loss)) {
                run.aborted = true;
                run.abort_reason =
                    msgf("non-finite batch loss at epoch %d, sample offset %zu", e, pos);
                stop = true;
                break;
            }
            adam_update(hyper.adam, run.opt, run.last, g.grad);
        }
        rec.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        run.history.push_back(rec);
        if (progress) progress(rec);
    }

    if (!run.aborted) {
        run.final_loss = eval_train();
        if (std::isfinite(run.final_loss)) {
            note_boundary(static_cast<uint64_t>(hyper.epochs), run.final_loss);
        } else {
            run.aborted = true;
            run.abort_reason = "non-finite training loss after the final epoch";
        }
    }

    if (run.aborted) {
        run.last = last_good;
        run.opt = last_good_opt;
        run.final_loss = last_good_loss;
        if (run.best.W.empty()) run.best = run.last;  // aborted before any boundary
    }
    return run;
}

void write_history_csv(const std::filesystem::path& path, const TrainRun& run) {
    AtomicFileWriter w(path);
    w.write_text(run.has_val ? "epoch,train_loss,val_loss,seconds\n"
                             : "epoch,train_loss,seconds\n");
    for (const EpochRecord& r : run.history) {
        std::string row = std::to_string(r.epoch) + "," +
                          format_double_exact(r.train_loss);
        if (run.has_val) row += "," + format_double_exact(r.val_loss);
        row += "," + msgf("%.3f", r.seconds) + "\n";
        w.write_text(row);
    }
    w.commit();
}

}  // namespace memflow
