#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "memflow/checkpoint.hpp"
#include "memflow/config.hpp"
#include "memflow/dataset.hpp"
#include "memflow/errors.hpp"
#include "memflow/evaluate.hpp"
#include "memflow/io_util.hpp"
#include "memflow/predictor.hpp"
#include "memflow/system.hpp"
#include "memflow/trainer.hpp"
#include "memflow/trajectory_io.hpp"
#include "memflow/version.hpp"

namespace fs = std::filesystem;
using namespace memflow;

namespace {

// ---------------------------------------------------------------------------
// Settings resolution: explicit flag > config file > (seeds only)
// MEMFLOW_SEED environment variable > default.
// ---------------------------------------------------------------------------

template <typename T>
std::optional<T> given(const CLI::Option* opt, const T& storage) {
    if (opt != nullptr && opt->count() > 0) return storage;
    return std::nullopt;
}

template <typename T>
T pick(const std::optional<T>& flag, const std::optional<T>& cfg, T fallback) {
    if (flag) return *flag;
    if (cfg) return *cfg;
    return fallback;
}

template <typename T>
T need(const std::optional<T>& flag, const std::optional<T>& cfg, const char* what) {
    if (flag) return *flag;
    if (cfg) return *cfg;
    throw ConfigError(msgf("missing required setting: %s (flag or config key)", what));
}

uint64_t env_seed() {
    const char* env = std::getenv("MEMFLOW_SEED");
    if (env == nullptr) return 0;
    return parse_u64(env, "MEMFLOW_SEED");
}

uint64_t pick_seed(const std::optional<uint64_t>& flag,
                   const std::optional<uint64_t>& cfg) {
    if (flag) return *flag;
    if (cfg) return *cfg;
    return env_seed();
}

int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

ExperimentConfig maybe_config(const std::string& path) {
    if (path.empty()) return ExperimentConfig{};
    return load_experiment_config(path);
}

// Artifact collision policy: refuse to clobber an existing artifact unless
// --force is given.
void ensure_writable(const fs::path& p, bool force, const char* what) {
    if (fs::exists(p) && !force)
        throw ConfigError(msgf("%s '%s' already exists (pass --force to overwrite)",
                               what, p.string().c_str()));
}

std::string u64s(uint64_t v) { return std::to_string(v); }

// ---------------------------------------------------------------------------
// Per-subcommand flag storage
// ---------------------------------------------------------------------------

struct CommonFlags {
    std::string config_path;
    std::string out;
    bool force = false;
    int threads = default_threads();
    CLI::Option* threads_opt = nullptr;
};

struct GenerateArgs {
    CommonFlags common;
    std::string system;
    size_t count = 0;
    size_t steps = 0;
    double dt = 0.0;
    int substeps = 4;
    uint64_t seed = 0;
    bool debug_params = false;
    CLI::Option *system_opt = nullptr, *count_opt = nullptr, *steps_opt = nullptr,
                *dt_opt = nullptr, *substeps_opt = nullptr, *seed_opt = nullptr;
};

struct BuildDatasetArgs {
    CommonFlags common;
    std::string traj_dir;
    int n_mem = 0, n_rec = 1, samples = 0;
    uint64_t seed = 0;
    CLI::Option *n_mem_opt = nullptr, *n_rec_opt = nullptr, *samples_opt = nullptr,
                *seed_opt = nullptr;
};

struct TrainArgs {
    CommonFlags common;
    std::string dataset_path;
    int n_mem = 0, n_rec = 0;
    std::string widths;
    double lr = 1e-3;
    int batch = 64;
    int epochs = 0;
    uint64_t seed = 0;
    double val_fraction = 0.0;
    bool normalize = false;
    bool quiet = false;
    CLI::Option *n_mem_opt = nullptr, *n_rec_opt = nullptr, *widths_opt = nullptr,
                *lr_opt = nullptr, *batch_opt = nullptr, *epochs_opt = nullptr,
                *seed_opt = nullptr, *val_opt = nullptr, *norm_opt = nullptr;
};

struct PredictArgs {
    CommonFlags common;
    std::string checkpoint;
    std::string system;
    std::string x0;
    size_t steps = 0;
    uint64_t seed = 0;
    int substeps = 4;
    bool with_reference = false;
    CLI::Option *system_opt = nullptr, *x0_opt = nullptr, *seed_opt = nullptr,
                *substeps_opt = nullptr;
};

struct EvalEnsembleArgs {
    CommonFlags common;
    std::string checkpoint;
    std::string system;
    double t_eval = 0.0;
    int runs = 0;
    uint64_t seed = 0;
    int substeps = 4;
    CLI::Option *system_opt = nullptr, *t_eval_opt = nullptr, *runs_opt = nullptr,
                *seed_opt = nullptr, *substeps_opt = nullptr;
};

struct EvalSweepArgs {
    CommonFlags common;
    std::string system;
    std::string n_mem_list, n_rec_list, widths;
    size_t count = 0, steps = 0;
    double dt = 0.0;
    int substeps = 4, samples = 0;
    double lr = 1e-3;
    int batch = 64, epochs = 0;
    double val_fraction = 0.0;
    bool normalize = false;
    double t_eval = 0.0;
    int runs = 0;
    uint64_t seed = 0;
    CLI::Option *system_opt = nullptr, *n_mem_opt = nullptr, *n_rec_opt = nullptr,
                *widths_opt = nullptr, *count_opt = nullptr, *steps_opt = nullptr,
                *dt_opt = nullptr, *substeps_opt = nullptr, *samples_opt = nullptr,
                *lr_opt = nullptr, *batch_opt = nullptr, *epochs_opt = nullptr,
                *val_opt = nullptr, *norm_opt = nullptr, *t_eval_opt = nullptr,
                *runs_opt = nullptr, *seed_opt = nullptr;
};

struct EvalBifurcationArgs {
    CommonFlags common;
    std::string system;
    std::string mode = "reference";
    std::string checkpoint;
    std::string grid;
    std::string x0;
    double dt = 0.0;
    double window_start = 50.0, window_end = 70.0;
    int substeps = 4;
    CLI::Option *system_opt = nullptr, *grid_opt = nullptr, *x0_opt = nullptr,
                *dt_opt = nullptr, *wstart_opt = nullptr, *wend_opt = nullptr,
                *substeps_opt = nullptr;
};

struct InfoArgs {
    std::string checkpoint;
    std::string dataset;
    std::string collection;
};

void add_common(CLI::App* cmd, CommonFlags& c, bool with_out = true,
                bool with_threads = false) {
    cmd->add_option("--config", c.config_path, "Experiment config file (key = value)");
    if (with_out) cmd->add_option("--out", c.out, "Output path")->required();
    cmd->add_flag("--force", c.force, "Overwrite existing artifacts");
    if (with_threads)
        c.threads_opt =
            cmd->add_option("--threads", c.threads, "Worker thread cap (default: cores)");
}

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

int run_generate(const GenerateArgs& a) {
    const ExperimentConfig cfg = maybe_config(a.common.config_path);
    const std::string system =
        need(given(a.system_opt, a.system), cfg.system, "system");
    const SystemSpec spec = make_system(system);

    GenerationConfig gen;
    gen.num_trajectories =
        need(given(a.count_opt, a.count), cfg.gen_trajectories, "generation.num_trajectories");
    gen.steps = need(given(a.steps_opt, a.steps), cfg.gen_steps, "generation.steps");
    gen.dt = need(given(a.dt_opt, a.dt), cfg.dt, "generation.dt");
    gen.substeps = pick(given(a.substeps_opt, a.substeps), cfg.gen_substeps, 4);
    gen.seed = pick_seed(given(a.seed_opt, a.seed), cfg.gen_seed);
    gen.debug_params = a.debug_params;

    const fs::path out(a.common.out);
    ensure_writable(out / "index.json", a.common.force, "trajectory collection");
    const size_t written = generate_collection(spec, gen, out, a.common.threads);

    std::printf("RESULT generate system=%s count=%zu steps=%zu dt=%s substeps=%d "
                "seed=%s debug=%d out=%s\n",
                system.c_str(), written, gen.steps, format_double_exact(gen.dt).c_str(),
                gen.substeps, u64s(gen.seed).c_str(), gen.debug_params ? 1 : 0,
                out.string().c_str());
    return 0;
}

int run_build_dataset(const BuildDatasetArgs& a) {
    const ExperimentConfig cfg = maybe_config(a.common.config_path);
    const int n_mem = need(given(a.n_mem_opt, a.n_mem), cfg.n_mem, "dataset.n_mem");
    const int n_rec = need(given(a.n_rec_opt, a.n_rec), cfg.n_rec, "dataset.n_rec");
    const int samples = need(given(a.samples_opt, a.samples), cfg.samples_per_traj,
                             "dataset.samples_per_traj");
    const uint64_t seed = pick_seed(given(a.seed_opt, a.seed), cfg.dataset_seed);

    const std::vector<Trajectory> trajs =
        load_collection(a.traj_dir, /*for_training=*/true);
    const BuildResult built = build_training_set(trajs, n_mem, n_rec, samples, seed);

    const fs::path out(a.common.out);
    ensure_writable(out, a.common.force, "dataset file");
    save_dataset(out, built.dataset);

    std::printf("RESULT build-dataset J=%s n_mem=%d n_rec=%d samples_per_traj=%d "
                "skipped=%zu seed=%s out=%s\n",
                u64s(built.dataset.meta.J).c_str(), n_mem, n_rec, samples,
                built.skipped_trajectories, u64s(seed).c_str(), out.string().c_str());
    return 0;
}

int run_train(const TrainArgs& a) {
    const ExperimentConfig cfg = maybe_config(a.common.config_path);
    const Dataset data = load_dataset(a.dataset_path);

    // The dataset fixes the model geometry; explicit flags act as
    // cross-checks against training on the wrong file.
    const std::optional<int> want_mem = given(a.n_mem_opt, a.n_mem);
    const std::optional<int> want_rec = given(a.n_rec_opt, a.n_rec);
    if (want_mem && *want_mem != data.meta.n_M)
        throw ConfigError(msgf("--n-mem %d does not match the dataset (n_mem = %d)",
                               *want_mem, data.meta.n_M));
    if (want_rec && *want_rec != data.meta.n_R)
        throw ConfigError(msgf("--n-rec %d does not match the dataset (n_rec = %d)",
                               *want_rec, data.meta.n_R));

    ModelConfig config;
    config.n = data.meta.n;
    config.n_M = data.meta.n_M;
    config.n_R = data.meta.n_R;
    config.dt = data.meta.dt;
    std::optional<std::vector<int>> widths_flag;
    if (a.widths_opt != nullptr && a.widths_opt->count() > 0)
        widths_flag = parse_int_list(a.widths, "--widths");
    config.hidden_widths = pick(widths_flag, cfg.widths, std::vector<int>{30, 30, 30});

    TrainHyper hyper;
    hyper.adam.lr = pick(given(a.lr_opt, a.lr), cfg.lr, 1e-3);
    hyper.batch_size = pick(given(a.batch_opt, a.batch), cfg.batch, 64);
    hyper.epochs = need(given(a.epochs_opt, a.epochs), cfg.epochs, "train.epochs");
    hyper.seed = pick_seed(given(a.seed_opt, a.seed), cfg.train_seed);
    hyper.val_fraction = pick(given(a.val_opt, a.val_fraction), cfg.val_fraction, 0.0);
    hyper.normalize =
        pick(given(a.norm_opt, a.normalize), cfg.normalize, false);

    const fs::path out(a.common.out);
    ensure_writable(out / "last.mfc", a.common.force, "checkpoint");

    ProgressFn progress;
    if (!a.quiet) {
        const bool has_val = hyper.val_fraction > 0.0;
        progress = [has_val](const EpochRecord& r) {
            if (has_val)
                std::fprintf(stderr, "epoch %s train_loss=%.8g val_loss=%.8g (%.2fs)\n",
                             u64s(r.epoch).c_str(), r.train_loss, r.val_loss, r.seconds);
            else
                std::fprintf(stderr, "epoch %s train_loss=%.8g (%.2fs)\n",
                             u64s(r.epoch).c_str(), r.train_loss, r.seconds);
        };
    }

    const TrainRun run = train(data, config, hyper, out, nullptr, progress);
    write_history_csv(out / "history.csv", run);

    std::printf("RESULT train epochs=%d final_loss=%s best_loss=%s best_epoch=%s "
                "aborted=%d out=%s\n",
                hyper.epochs, format_double_exact(run.final_loss).c_str(),
                format_double_exact(run.best_loss).c_str(), u64s(run.best_epoch).c_str(),
                run.aborted ? 1 : 0, out.string().c_str());
    if (run.aborted) {
        std::fprintf(stderr, "error: training aborted: %s (last good checkpoints kept)\n",
                     run.abort_reason.c_str());
        return 1;
    }
    return 0;
}

void write_prediction_csv(const fs::path& path, const PredictionRun& run) {
    AtomicFileWriter w(path);
    const size_t n = run.predicted.cols;
    std::string header = "t";
    for (size_t c = 1; c <= n; ++c) header += ",x_" + std::to_string(c);
    if (run.reference)
        for (size_t c = 1; c <= n; ++c) header += ",ref_" + std::to_string(c);
    w.write_text(header + "\n");

    auto emit = [&](double t, const double* x, const double* ref) {
        std::string row = format_double_exact(t);
        for (size_t c = 0; c < n; ++c) row += "," + format_double_exact(x[c]);
        if (run.reference != std::nullopt && ref != nullptr)
            for (size_t c = 0; c < n; ++c) row += "," + format_double_exact(ref[c]);
        w.write_text(row + "\n");
    };

    // Warmup rows are ground truth, so they double as their own reference.
    for (size_t k = 0; k < run.warmup.rows; ++k)
        emit(static_cast<double>(k) * run.dt, run.warmup.row(k), run.warmup.row(k));
    for (size_t m = 0; m < run.predicted.rows; ++m)
        emit(run.time_of(m), run.predicted.row(m),
             run.reference ? run.reference->row(m) : nullptr);
    w.commit();
}

int run_predict(const PredictArgs& a) {
    const ExperimentConfig cfg = maybe_config(a.common.config_path);
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    const Model model = to_model(ckpt);
    const std::string system =
        need(given(a.system_opt, a.system), cfg.system, "system");
    const SystemSpec spec = make_system(system);
    require(spec.state_dim == model.config.n,
            "predict: checkpoint and system disagree on the state dimension");
    if (a.steps < 1) throw ConfigError("predict: --steps must be >= 1");

    const uint64_t seed = pick_seed(given(a.seed_opt, a.seed), cfg.eval_seed);
    const int substeps = pick(given(a.substeps_opt, a.substeps), cfg.gen_substeps, 4);

    // Hidden-parameter discipline: the CLI never accepts alpha.  The run
    // draws it (and x0 too unless given) from the seed.
    RngStream stream = derive_stream(seed, 0);
    std::vector<double> x0;
    if (a.x0_opt != nullptr && a.x0_opt->count() > 0) {
        for (double v : parse_real_list(a.x0, "--x0")) x0.push_back(v);
        require(x0.size() == static_cast<size_t>(spec.state_dim),
                msgf("predict: --x0 needs %d components", spec.state_dim));
    } else {
        x0 = sample_initial_condition(spec, stream);
    }
    const std::vector<double> alpha = sample_parameters(spec, stream);

    PredictionRun run;
    if (a.with_reference) {
        const size_t K = static_cast<size_t>(model.config.n_M) + 1 + a.steps;
        const Trajectory ref = integrate(spec, x0, alpha, model.config.dt, K, substeps);
        Mat warmup(static_cast<size_t>(model.config.n_M) + 1,
                   static_cast<size_t>(model.config.n));
        std::copy(ref.states.begin(),
                  ref.states.begin() + static_cast<long>(warmup.a.size()),
                  warmup.a.begin());
        run = predict(model, warmup, a.steps);
        attach_reference(run, ref);
    } else {
        const Mat warmup =
            make_warmup(spec, x0, alpha, model.config.n_M, model.config.dt, substeps);
        run = predict(model, warmup, a.steps);
    }

    const fs::path out(a.common.out);
    ensure_writable(out, a.common.force, "prediction CSV");
    write_prediction_csv(out, run);

    std::printf("RESULT predict system=%s steps=%zu valid=%zu truncated=%d seed=%s "
                "out=%s\n",
                system.c_str(), run.requested_steps, run.valid_steps(),
                run.truncated ? 1 : 0, u64s(seed).c_str(), out.string().c_str());
    return 0;
}

int run_eval_ensemble(const EvalEnsembleArgs& a) {
    const ExperimentConfig cfg = maybe_config(a.common.config_path);
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    const Model model = to_model(ckpt);
    const std::string system =
        need(given(a.system_opt, a.system), cfg.system, "system");
    const SystemSpec spec = make_system(system);

    const double t_eval = need(given(a.t_eval_opt, a.t_eval), cfg.t_eval, "eval.t_eval");
    const int runs = need(given(a.runs_opt, a.runs), cfg.eval_runs, "eval.runs");
    const uint64_t seed = pick_seed(given(a.seed_opt, a.seed), cfg.eval_seed);
    const int substeps = pick(given(a.substeps_opt, a.substeps), cfg.eval_substeps, 4);

    const EnsembleReport report =
        ensemble_error(model, spec, t_eval, runs, seed, substeps, a.common.threads);

    const fs::path out(a.common.out);
    ensure_writable(out, a.common.force, "ensemble CSV");
    write_ensemble_csv(out, report);

    std::printf("RESULT eval-ensemble system=%s t_eval=%s runs=%d completed=%d "
                "truncated=%d mean_error=%s seed=%s out=%s\n",
                system.c_str(), format_double_exact(report.t_eval).c_str(),
                report.requested, report.completed, report.truncated,
                format_double_exact(report.mean_error).c_str(), u64s(seed).c_str(),
                out.string().c_str());
    return 0;
}

int run_eval_sweep(const EvalSweepArgs& a) {
    const ExperimentConfig cfg = maybe_config(a.common.config_path);

    SweepConfig sweep;
    const std::string system =
        need(given(a.system_opt, a.system), cfg.system, "system");
    sweep.system = parse_system_id(system);

    std::optional<std::vector<int>> mem_flag, rec_flag, widths_flag;
    if (a.n_mem_opt != nullptr && a.n_mem_opt->count() > 0)
        mem_flag = parse_int_list(a.n_mem_list, "--n-mem-list");
    if (a.n_rec_opt != nullptr && a.n_rec_opt->count() > 0)
        rec_flag = parse_int_list(a.n_rec_list, "--n-rec-list");
    if (a.widths_opt != nullptr && a.widths_opt->count() > 0)
        widths_flag = parse_int_list(a.widths, "--widths");
    sweep.n_M_list = need(mem_flag, cfg.sweep_n_mem, "sweep.n_mem_list");
    sweep.n_R_list = need(rec_flag, cfg.sweep_n_rec, "sweep.n_rec_list");
    sweep.hidden_widths = pick(widths_flag, cfg.widths, std::vector<int>{30, 30, 30});

    sweep.dt = need(given(a.dt_opt, a.dt), cfg.dt, "generation.dt");
    sweep.num_trajectories =
        need(given(a.count_opt, a.count), cfg.gen_trajectories,
             "generation.num_trajectories");
    sweep.traj_steps = need(given(a.steps_opt, a.steps), cfg.gen_steps, "generation.steps");
    sweep.substeps = pick(given(a.substeps_opt, a.substeps), cfg.gen_substeps, 4);
    sweep.samples_per_traj = need(given(a.samples_opt, a.samples), cfg.samples_per_traj,
                                  "dataset.samples_per_traj");

    sweep.hyper.adam.lr = pick(given(a.lr_opt, a.lr), cfg.lr, 1e-3);
    sweep.hyper.batch_size = pick(given(a.batch_opt, a.batch), cfg.batch, 64);
    sweep.hyper.epochs = need(given(a.epochs_opt, a.epochs), cfg.epochs, "train.epochs");
    sweep.hyper.val_fraction = pick(given(a.val_opt, a.val_fraction), cfg.val_fraction, 0.0);
    sweep.hyper.normalize = pick(given(a.norm_opt, a.normalize), cfg.normalize, false);

    sweep.t_eval = need(given(a.t_eval_opt, a.t_eval), cfg.t_eval, "eval.t_eval");
    sweep.ensemble_runs = need(given(a.runs_opt, a.runs), cfg.eval_runs, "eval.runs");
    sweep.master_seed = pick_seed(given(a.seed_opt, a.seed), cfg.eval_seed);
    sweep.threads = a.common.threads;

    const fs::path out(a.common.out);
    ensure_writable(out, a.common.force, "sweep CSV");

    const std::vector<SweepRow> rows = memory_sweep(sweep, [](const SweepRow& r) {
        std::fprintf(stderr,
                     "sweep n_mem=%d n_rec=%d final_train_loss=%.8g mean_error=%.8g "
                     "completed=%d truncated=%d%s\n",
                     r.n_M, r.n_R, r.final_train_loss, r.mean_error, r.completed,
                     r.truncated, r.aborted ? " ABORTED" : "");
    });
    write_sweep_csv(out, rows);

    std::printf("RESULT eval-sweep system=%s combos=%zu seed=%s out=%s\n", system.c_str(),
                rows.size(), u64s(sweep.master_seed).c_str(), out.string().c_str());
    return 0;
}

int run_eval_bifurcation(const EvalBifurcationArgs& a) {
    const ExperimentConfig cfg = maybe_config(a.common.config_path);
    const std::string system =
        need(given(a.system_opt, a.system), cfg.system, "system");
    const SystemSpec spec = make_system(system);

    ScanMode mode;
    if (a.mode == "reference")
        mode = ScanMode::Reference;
    else if (a.mode == "dnn")
        mode = ScanMode::Dnn;
    else if (a.mode == "both")
        mode = ScanMode::Both;
    else
        throw ConfigError(msgf("--mode must be reference|dnn|both, got '%s'",
                               a.mode.c_str()));

    std::optional<Model> model;
    if (mode != ScanMode::Reference) {
        if (a.checkpoint.empty())
            throw ConfigError("eval-bifurcation: --checkpoint required in dnn/both mode");
        model = to_model(load_checkpoint(a.checkpoint));
    }

    BifurcationConfig bc;
    std::optional<std::vector<double>> grid_flag, x0_flag;
    if (a.grid_opt != nullptr && a.grid_opt->count() > 0)
        grid_flag = parse_real_list(a.grid, "--grid");
    if (a.x0_opt != nullptr && a.x0_opt->count() > 0)
        x0_flag = parse_real_list(a.x0, "--x0");
    bc.param_grid = need(grid_flag, cfg.bif_grid, "bifurcation.grid");
    bc.x0 = need(x0_flag, cfg.bif_x0, "bifurcation.x0");
    bc.window_start =
        pick(given(a.wstart_opt, a.window_start), cfg.bif_window_start, 50.0);
    bc.window_end = pick(given(a.wend_opt, a.window_end), cfg.bif_window_end, 70.0);
    bc.substeps = pick(given(a.substeps_opt, a.substeps), cfg.eval_substeps, 4);
    bc.threads = a.common.threads;

    const std::optional<double> dt_flag = given(a.dt_opt, a.dt);
    if (model) {
        bc.dt = model->config.dt;
        const double dt_given = pick(dt_flag, cfg.dt, bc.dt);
        if (dt_given != bc.dt)
            throw ConfigError(msgf("--dt %g conflicts with the checkpoint's dt %g",
                                   dt_given, bc.dt));
    } else {
        bc.dt = need(dt_flag, cfg.dt, "generation.dt");
    }

    const fs::path out(a.common.out);
    ensure_writable(out, a.common.force, "scan CSV");

    const AmplitudeScan scan =
        bifurcation_scan(spec, mode, model ? &*model : nullptr, bc);
    write_scan_csv(out, scan);

    std::printf("RESULT eval-bifurcation system=%s mode=%s points=%zu out=%s\n",
                system.c_str(), a.mode.c_str(), bc.param_grid.size(),
                out.string().c_str());
    return 0;
}

int run_info(const InfoArgs& a) {
    const int sources = (a.checkpoint.empty() ? 0 : 1) + (a.dataset.empty() ? 0 : 1) +
                        (a.collection.empty() ? 0 : 1);
    if (sources != 1)
        throw ConfigError(
            "info: pass exactly one of --checkpoint, --dataset, --collection");

    if (!a.checkpoint.empty()) {
        const Checkpoint c = load_checkpoint(a.checkpoint);
        std::string widths;
        for (size_t i = 0; i < c.config.hidden_widths.size(); ++i)
            widths += (i ? "," : "") + std::to_string(c.config.hidden_widths[i]);
        std::printf("kind=checkpoint\n");
        std::printf("n=%d\n", c.config.n);
        std::printf("n_mem=%d\n", c.config.n_M);
        std::printf("n_rec=%d\n", c.config.n_R);
        std::printf("dt=%s\n", format_double_exact(c.config.dt).c_str());
        std::printf("widths=%s\n", widths.c_str());
        std::printf("activation=relu\n");
        std::printf("epoch=%s\n", u64s(c.epoch).c_str());
        std::printf("train_loss=%s\n", format_double_exact(c.train_loss).c_str());
        std::printf("seed=%s\n", u64s(c.seed).c_str());
        std::printf("has_norm=%d\n", c.norm.enabled() ? 1 : 0);
        std::printf("has_opt_state=%d\n", c.has_opt_state ? 1 : 0);
        std::printf("tool=%s\n", kToolVersion);
    } else if (!a.dataset.empty()) {
        const Dataset d = load_dataset(a.dataset);
        std::printf("kind=dataset\n");
        std::printf("J=%s\n", u64s(d.meta.J).c_str());
        std::printf("n=%d\n", d.meta.n);
        std::printf("n_mem=%d\n", d.meta.n_M);
        std::printf("n_rec=%d\n", d.meta.n_R);
        std::printf("dt=%s\n", format_double_exact(d.meta.dt).c_str());
        std::printf("seed=%s\n", u64s(d.meta.source_seed).c_str());
    } else {
        const CollectionIndex idx = load_collection_index(a.collection);
        std::printf("kind=collection\n");
        std::printf("system=%s\n", idx.system.c_str());
        std::printf("n=%d\n", idx.n);
        std::printf("count=%zu\n", idx.count);
        std::printf("steps=%zu\n", idx.K);
        std::printf("dt=%s\n", format_double_exact(idx.dt).c_str());
        std::printf("substeps=%d\n", idx.substeps);
        std::printf("seed=%s\n", u64s(idx.seed).c_str());
        std::printf("debug=%d\n", idx.debug ? 1 : 0);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"memflow: learns flow-map models of dynamical systems with hidden "
                 "parameters from memory of past states"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    GenerateArgs gen;
    {
        CLI::App* c = app.add_subcommand(
            "generate", "Sample (x0, alpha) pairs and integrate true-system trajectories");
        add_common(c, gen.common, true, true);
        gen.system_opt = c->add_option("--system", gen.system,
                                       "System name (pendulum|linear20|cstr|cell)");
        gen.count_opt = c->add_option("--count", gen.count, "Number of trajectories");
        gen.steps_opt = c->add_option("--steps", gen.steps, "Recorded steps per trajectory");
        gen.dt_opt = c->add_option("--dt", gen.dt, "Recording interval");
        gen.substeps_opt =
            c->add_option("--substeps", gen.substeps, "Integrator substeps per interval");
        gen.seed_opt = c->add_option("--seed", gen.seed, "Generation seed");
        c->add_flag("--debug-params", gen.debug_params,
                    "Record hidden parameters in the files (inspection only; such "
                    "trajectories are refused for training)");
    }

    BuildDatasetArgs bd;
    {
        CLI::App* c = app.add_subcommand(
            "build-dataset", "Slice trajectories into training windows (MFD1 file)");
        add_common(c, bd.common);
        c->add_option("--traj", bd.traj_dir, "Trajectory collection directory")->required();
        bd.n_mem_opt = c->add_option("--n-mem", bd.n_mem, "Memory depth n_M");
        bd.n_rec_opt = c->add_option("--n-rec", bd.n_rec, "Recurrent steps n_R");
        bd.samples_opt =
            c->add_option("--samples-per-traj", bd.samples, "Windows drawn per trajectory");
        bd.seed_opt = c->add_option("--seed", bd.seed, "Window sampling seed");
    }

    TrainArgs tr;
    {
        CLI::App* c = app.add_subcommand("train", "Train a model on an MFD1 dataset");
        add_common(c, tr.common);
        c->add_option("--dataset", tr.dataset_path, "MFD1 dataset file")->required();
        tr.n_mem_opt =
            c->add_option("--n-mem", tr.n_mem, "Cross-check: expected dataset n_M");
        tr.n_rec_opt =
            c->add_option("--n-rec", tr.n_rec, "Cross-check: expected dataset n_R");
        tr.widths_opt = c->add_option("--widths", tr.widths,
                                      "Hidden layer widths, e.g. 30,30,30");
        tr.lr_opt = c->add_option("--lr", tr.lr, "Adam learning rate");
        tr.batch_opt = c->add_option("--batch", tr.batch, "Mini-batch size");
        tr.epochs_opt = c->add_option("--epochs", tr.epochs, "Training epochs");
        tr.seed_opt = c->add_option("--seed", tr.seed, "Training seed");
        tr.val_opt = c->add_option("--val-fraction", tr.val_fraction,
                                   "Held-out fraction (0 disables)");
        tr.norm_opt = c->add_flag("--normalize", tr.normalize,
                                  "Standardize network inputs (stats stored in checkpoint)");
        c->add_flag("--quiet", tr.quiet, "Suppress per-epoch progress on stderr");
    }

    PredictArgs pr;
    {
        CLI::App* c = app.add_subcommand(
            "predict", "Roll a trained model out from a true-system warmup");
        add_common(c, pr.common);
        c->add_option("--checkpoint", pr.checkpoint, "MFC1 checkpoint")->required();
        pr.system_opt = c->add_option("--system", pr.system, "System name");
        pr.x0_opt = c->add_option("--x0", pr.x0,
                                  "Initial state, comma separated (drawn from the seed "
                                  "when omitted)");
        c->add_option("--steps", pr.steps, "Prediction steps beyond the warmup")
            ->required();
        pr.seed_opt = c->add_option("--seed", pr.seed,
                                    "Seed for the hidden parameters (and x0 if omitted)");
        pr.substeps_opt =
            c->add_option("--substeps", pr.substeps, "Integrator substeps for the warmup");
        c->add_flag("--with-reference", pr.with_reference,
                    "Also integrate the true system and emit ref_* columns");
    }

    EvalEnsembleArgs ee;
    {
        CLI::App* c = app.add_subcommand(
            "eval-ensemble", "Mean prediction error at t_eval over fresh (x0, alpha) draws");
        add_common(c, ee.common, true, true);
        c->add_option("--checkpoint", ee.checkpoint, "MFC1 checkpoint")->required();
        ee.system_opt = c->add_option("--system", ee.system, "System name");
        ee.t_eval_opt = c->add_option("--t-eval", ee.t_eval, "Evaluation time");
        ee.runs_opt = c->add_option("--runs", ee.runs, "Ensemble size");
        ee.seed_opt = c->add_option("--seed", ee.seed, "Ensemble seed");
        ee.substeps_opt =
            c->add_option("--substeps", ee.substeps, "Integrator substeps");
    }

    EvalSweepArgs es;
    {
        CLI::App* c = app.add_subcommand(
            "eval-sweep", "Train and evaluate across a grid of (n_M, n_R)");
        add_common(c, es.common, true, true);
        es.system_opt = c->add_option("--system", es.system, "System name");
        es.n_mem_opt = c->add_option("--n-mem-list", es.n_mem_list,
                                     "Memory depths, e.g. 5,40");
        es.n_rec_opt = c->add_option("--n-rec-list", es.n_rec_list,
                                     "Recurrent depths, e.g. 10");
        es.widths_opt = c->add_option("--widths", es.widths, "Hidden widths");
        es.count_opt = c->add_option("--count", es.count, "Trajectories per combination");
        es.steps_opt = c->add_option("--steps", es.steps, "Steps per trajectory");
        es.dt_opt = c->add_option("--dt", es.dt, "Recording interval");
        es.substeps_opt = c->add_option("--substeps", es.substeps, "Integrator substeps");
        es.samples_opt = c->add_option("--samples-per-traj", es.samples,
                                       "Windows per trajectory");
        es.lr_opt = c->add_option("--lr", es.lr, "Adam learning rate");
        es.batch_opt = c->add_option("--batch", es.batch, "Mini-batch size");
        es.epochs_opt = c->add_option("--epochs", es.epochs, "Epochs per combination");
        es.val_opt = c->add_option("--val-fraction", es.val_fraction, "Held-out fraction");
        es.norm_opt = c->add_flag("--normalize", es.normalize, "Standardize inputs");
        es.t_eval_opt = c->add_option("--t-eval", es.t_eval, "Evaluation time");
        es.runs_opt = c->add_option("--runs", es.runs, "Ensemble size per combination");
        es.seed_opt = c->add_option("--seed", es.seed, "Master seed");
    }

    EvalBifurcationArgs eb;
    {
        CLI::App* c = app.add_subcommand(
            "eval-bifurcation", "Amplitude scan over a parameter grid");
        add_common(c, eb.common, true, true);
        eb.system_opt = c->add_option("--system", eb.system, "System name");
        c->add_option("--mode", eb.mode, "reference|dnn|both (default reference)");
        c->add_option("--checkpoint", eb.checkpoint, "MFC1 checkpoint (dnn/both mode)");
        eb.grid_opt = c->add_option("--grid", eb.grid,
                                    "Parameter values: a,b,c or lo:step:hi");
        eb.x0_opt = c->add_option("--x0", eb.x0, "Start state, comma separated");
        eb.dt_opt = c->add_option("--dt", eb.dt, "Time step (reference mode)");
        eb.wstart_opt = c->add_option("--window-start", eb.window_start,
                                      "Amplitude window start time");
        eb.wend_opt = c->add_option("--window-end", eb.window_end,
                                    "Amplitude window end time");
        eb.substeps_opt = c->add_option("--substeps", eb.substeps, "Integrator substeps");
    }

    InfoArgs in;
    {
        CLI::App* c = app.add_subcommand("info", "Describe an artifact");
        c->add_option("--checkpoint", in.checkpoint, "MFC1 checkpoint");
        c->add_option("--dataset", in.dataset, "MFD1 dataset");
        c->add_option("--collection", in.collection, "Trajectory collection directory");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("generate")) return run_generate(gen);
        if (app.got_subcommand("build-dataset")) return run_build_dataset(bd);
        if (app.got_subcommand("train")) return run_train(tr);
        if (app.got_subcommand("predict")) return run_predict(pr);
        if (app.got_subcommand("eval-ensemble")) return run_eval_ensemble(ee);
        if (app.got_subcommand("eval-sweep")) return run_eval_sweep(es);
        if (app.got_subcommand("eval-bifurcation")) return run_eval_bifurcation(eb);
        if (app.got_subcommand("info")) return run_info(in);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
