#include "memflow/evaluate.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "memflow/errors.hpp"
#include "memflow/io_util.hpp"
#include "memflow/thread_pool.hpp"
#include "memflow/trajectory_io.hpp"

namespace memflow {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

size_t time_to_step(double t, double dt, const char* what) {
    require(dt > 0.0, "time grid: dt must be > 0");
    const double k = std::round(t / dt);
    require(k >= 0.0 && std::fabs(k * dt - t) <= 1e-9 * std::max(1.0, std::fabs(t)),
            msgf("%s = %g does not sit on the dt = %g step grid", what, t, dt));
    return static_cast<size_t>(k);
}

double l2_distance(const double* a, const double* b, size_t n) {
    double acc = 0.0;
    for (size_t c = 0; c < n; ++c) {
        const double d = a[c] - b[c];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

Vec l2_error_series(const PredictionRun& run) {
    require(run.reference.has_value(), "l2_error_series: run has no reference attached");
    const Mat& ref = *run.reference;
    require(ref.same_shape(run.predicted),
            "l2_error_series: reference and prediction shapes differ");
    Vec series(run.predicted.rows);
    for (size_t m = 0; m < run.predicted.rows; ++m)
        series[m] = l2_distance(run.predicted.row(m), ref.row(m), run.predicted.cols);
    return series;
}

double amplitude(const double* signal, size_t count) {
    require(count >= 1, "amplitude: empty window");
    double lo = signal[0], hi = signal[0];
    for (size_t i = 0; i < count; ++i) {
        require(std::isfinite(signal[i]), "amplitude: non-finite sample in window");
        lo = std::min(lo, signal[i]);
        hi = std::max(hi, signal[i]);
    }
    return (hi - lo) / 2.0;
}

double amplitude(const Vec& signal) { return amplitude(signal.data(), signal.size()); }

// --- Ensemble error ------------------------------------------------------

EnsembleReport ensemble_error(const Model& model, const SystemSpec& spec, double t_eval,
                              int runs, uint64_t seed, int substeps, int threads) {
    model.config.validate();
    require(model.config.n == spec.state_dim,
            "ensemble_error: model and system state dimensions differ");
    require(runs >= 1, "ensemble_error: need at least one run");
    require(substeps >= 1, "ensemble_error: substeps must be >= 1");

    const int n_M = model.config.n_M;
    const double dt = model.config.dt;
    const size_t k_eval = time_to_step(t_eval, dt, "t_eval");
    require(k_eval > static_cast<size_t>(n_M),
            "ensemble_error: t_eval lies inside the warmup window");
    const size_t steps = k_eval - static_cast<size_t>(n_M);

    EnsembleReport report;
    report.t_eval = static_cast<double>(k_eval) * dt;
    report.k_eval = k_eval;
    report.requested = runs;
    report.run_errors.assign(static_cast<size_t>(runs), kNan);

    // Run r is fully determined by derive(seed, r); the slots are disjoint,
    // so the worker schedule cannot change the report.
    parallel_for(static_cast<size_t>(runs), threads, [&](size_t r) {
        RngStream stream = derive_stream(seed, r);
        const std::vector<double> x0 = sample_initial_condition(spec, stream);
        const std::vector<double> alpha = sample_parameters(spec, stream);

        Trajectory ref;
        try {
            ref = integrate(spec, x0, alpha, dt, k_eval + 1, substeps);
        } catch (const TruncationError&) {
            return;  // reference blew up; the run counts as truncated
        }

        Mat warmup(static_cast<size_t>(n_M) + 1, static_cast<size_t>(spec.state_dim));
        std::memcpy(warmup.a.data(), ref.row(0), warmup.a.size() * sizeof(double));
        PredictionRun run = predict(model, warmup, steps);
        if (run.truncated) return;
        report.run_errors[r] = l2_distance(run.predicted.row(steps - 1), ref.row(k_eval),
                                           static_cast<size_t>(spec.state_dim));
    });

    double total = 0.0;
    for (double e : report.run_errors) {
        if (std::isnan(e)) {
            report.truncated += 1;
        } else {
            report.completed += 1;
            total += e;
        }
    }
    report.mean_error =
        report.completed > 0 ? total / static_cast<double>(report.completed) : kNan;
    return report;
}

void write_ensemble_csv(const std::filesystem::path& path, const EnsembleReport& report) {
    AtomicFileWriter w(path);
    w.write_text("run,completed,error\n");
    for (size_t r = 0; r < report.run_errors.size(); ++r) {
        const bool ok = !std::isnan(report.run_errors[r]);
        w.write_text(std::to_string(r) + "," + (ok ? "1" : "0") + "," +
                     format_double_exact(report.run_errors[r]) + "\n");
    }
    w.commit();
}

// --- Bifurcation amplitude scan ------------------------------------------

namespace {

ScanPoint window_point(double value, const Mat& states, size_t first_global_step,
                       size_t k0, size_t k1) {
    // states row m corresponds to global step first_global_step + m.
    ScanPoint p;
    p.param = value;
    const size_t need = k1 - first_global_step + 1;
    if (first_global_step > k0 || states.rows < need) {
        p.truncated = true;
        return p;
    }
    const size_t m0 = k0 - first_global_step;
    const size_t count = k1 - k0 + 1;
    Vec x1(count), x2(count);
    for (size_t m = 0; m < count; ++m) {
        x1[m] = states.at(m0 + m, 0);
        x2[m] = states.at(m0 + m, 1);
    }
    p.x1_amplitude = amplitude(x1);
    p.x2_amplitude = amplitude(x2);
    return p;
}

}  // namespace

AmplitudeScan bifurcation_scan(const SystemSpec& spec, ScanMode mode, const Model* model,
                               const BifurcationConfig& cfg) {
    require(spec.state_dim >= 2, "bifurcation_scan: system needs at least two components");
    require(spec.param_dim == 1, "bifurcation_scan: system must have one scan parameter");
    require(!cfg.param_grid.empty(), "bifurcation_scan: empty parameter grid");
    for (size_t i = 1; i < cfg.param_grid.size(); ++i)
        require(cfg.param_grid[i] > cfg.param_grid[i - 1],
                "bifurcation_scan: grid must be strictly increasing");
    require(cfg.dt > 0.0 && cfg.substeps >= 1, "bifurcation_scan: bad time grid");
    require(cfg.x0.size() == static_cast<size_t>(spec.state_dim),
            "bifurcation_scan: x0 dimension mismatch");
    const bool want_ref = mode == ScanMode::Reference || mode == ScanMode::Both;
    const bool want_dnn = mode == ScanMode::Dnn || mode == ScanMode::Both;
    if (want_dnn) {
        require(model != nullptr, "bifurcation_scan: model required in this mode");
        model->config.validate();
        require(model->config.n == spec.state_dim,
                "bifurcation_scan: model and system state dimensions differ");
        require(model->config.dt == cfg.dt,
                "bifurcation_scan: model was trained at a different dt");
    }

    const size_t k0 = time_to_step(cfg.window_start, cfg.dt, "window start");
    const size_t k1 = time_to_step(cfg.window_end, cfg.dt, "window end");
    require(k1 > k0, "bifurcation_scan: empty amplitude window");
    if (want_dnn)
        require(k0 > static_cast<size_t>(model->config.n_M),
                "bifurcation_scan: amplitude window overlaps the warmup");

    AmplitudeScan scan;
    const size_t points = cfg.param_grid.size();
    if (want_ref) scan.reference.assign(points, ScanPoint{});
    if (want_dnn) scan.dnn.assign(points, ScanPoint{});

    parallel_for(points, cfg.threads, [&](size_t i) {
        const double value = cfg.param_grid[i];
        const std::vector<double> alpha{value};

        if (want_ref) {
            ScanPoint p;
            try {
                Trajectory traj = integrate(spec, cfg.x0, alpha, cfg.dt, k1 + 1,
                                            cfg.substeps);
                Mat states(traj.K, static_cast<size_t>(traj.n));
                states.a = std::move(traj.states);
                p = window_point(value, states, 0, k0, k1);
            } catch (const TruncationError&) {
                p.param = value;
                p.truncated = true;
            }
            scan.reference[i] = p;
        }

        if (want_dnn) {
            const int n_M = model->config.n_M;
            ScanPoint p;
            try {
                Mat warmup = make_warmup(spec, cfg.x0, alpha, n_M, cfg.dt, cfg.substeps);
                PredictionRun run =
                    predict(*model, warmup, k1 - static_cast<size_t>(n_M));
                p = window_point(value, run.predicted, static_cast<size_t>(n_M) + 1, k0,
                                 k1);
            } catch (const TruncationError&) {
                p.param = value;
                p.truncated = true;  // true system blew up during warmup
            }
            scan.dnn[i] = p;
        }
    });
    return scan;
}

void write_scan_csv(const std::filesystem::path& path, const AmplitudeScan& scan) {
    AtomicFileWriter w(path);
    w.write_text("param,source,x1_amplitude,x2_amplitude,truncated\n");
    auto rows = [&](const std::vector<ScanPoint>& pts, const char* source) {
        for (const ScanPoint& p : pts)
            w.write_text(format_double_exact(p.param) + "," + source + "," +
                         format_double_exact(p.x1_amplitude) + "," +
                         format_double_exact(p.x2_amplitude) + "," +
                         (p.truncated ? "1" : "0") + "\n");
    };
    rows(scan.reference, "reference");
    rows(scan.dnn, "dnn");
    w.commit();
}

// --- Memory-depth sweep ----------------------------------------------------

std::vector<SweepRow> memory_sweep(const SweepConfig& cfg,
                                   const SweepProgressFn& progress) {
    require(!cfg.n_M_list.empty() && !cfg.n_R_list.empty(),
            "memory_sweep: empty (n_M, n_R) grid");
    require(cfg.num_trajectories >= 1 && cfg.traj_steps >= 1 && cfg.samples_per_traj >= 1,
            "memory_sweep: empty data budget");
    require(cfg.ensemble_runs >= 1, "memory_sweep: need at least one evaluation run");
    require(cfg.dt > 0.0, "memory_sweep: dt must be > 0");

    const SystemSpec spec = make_system(cfg.system);
    std::vector<SweepRow> rows;

    size_t combo = 0;
    for (int n_M : cfg.n_M_list) {
        for (int n_R : cfg.n_R_list) {
            // Four derived seeds per combination, laid out so any subset of
            // the grid reproduces the full run's results exactly.
            const uint64_t gen_seed = derive_seed(cfg.master_seed, 4 * combo);
            const uint64_t window_seed = derive_seed(cfg.master_seed, 4 * combo + 1);
            const uint64_t train_seed = derive_seed(cfg.master_seed, 4 * combo + 2);
            const uint64_t eval_seed = derive_seed(cfg.master_seed, 4 * combo + 3);
            combo += 1;

            GenerationConfig gen;
            gen.num_trajectories = cfg.num_trajectories;
            gen.steps = cfg.traj_steps;
            gen.dt = cfg.dt;
            gen.substeps = cfg.substeps;
            gen.seed = gen_seed;
            const std::vector<Trajectory> trajs =
                generate_trajectories(spec, gen, cfg.threads);

            const BuildResult built =
                build_training_set(trajs, n_M, n_R, cfg.samples_per_traj, window_seed);

            ModelConfig config;
            config.n = spec.state_dim;
            config.n_M = n_M;
            config.n_R = n_R;
            config.dt = cfg.dt;
            config.hidden_widths = cfg.hidden_widths;

            TrainHyper hyper = cfg.hyper;
            hyper.seed = train_seed;
            const TrainRun run = train(built.dataset, config, hyper);

            SweepRow row;
            row.n_M = n_M;
            row.n_R = n_R;
            row.final_train_loss = run.final_loss;
            row.aborted = run.aborted;
            if (!run.aborted) {
                const Model model{config, run.best, run.norm};
                const EnsembleReport report =
                    ensemble_error(model, spec, cfg.t_eval, cfg.ensemble_runs, eval_seed,
                                   cfg.substeps, cfg.threads);
                row.mean_error = report.mean_error;
                row.completed = report.completed;
                row.truncated = report.truncated;
            } else {
                row.mean_error = kNan;
            }
            rows.push_back(row);
            if (progress) progress(row);
        }
    }
    return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    AtomicFileWriter w(path);
    w.write_text("n_mem,n_rec,final_train_loss,mean_error,completed,truncated,aborted\n");
    for (const SweepRow& r : rows)
        w.write_text(std::to_string(r.n_M) + "," + std::to_string(r.n_R) + "," +
                     format_double_exact(r.final_train_loss) + "," +
                     format_double_exact(r.mean_error) + "," +
                     std::to_string(r.completed) + "," + std::to_string(r.truncated) +
                     "," + (r.aborted ? "1" : "0") + "\n");
    w.commit();
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
    FileReader r(path);
    const std::string header = r.read_line();
    if (header != "n_mem,n_rec,final_train_loss,mean_error,completed,truncated,aborted")
        throw FormatError(msgf("'%s': unexpected sweep header", path.string().c_str()));
    std::vector<SweepRow> rows;
    for (;;) {
        std::string line;
        try {
            line = r.read_line();
        } catch (const IntegrityError&) {
            break;  // clean end of file
        }
        if (line.empty()) continue;
        SweepRow row;
        int aborted = 0;
        const int got =
            std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%d,%d,%d", &row.n_M, &row.n_R,
                        &row.final_train_loss, &row.mean_error, &row.completed,
                        &row.truncated, &aborted);
        if (got != 7)
            throw IntegrityError(msgf("'%s': malformed sweep row '%s'",
                                      path.string().c_str(), line.c_str()));
        row.aborted = aborted != 0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace memflow
