#include "memflow/predictor.hpp"

#include <cmath>
#include <cstring>

#include "memflow/errors.hpp"

namespace memflow {

namespace {

bool row_ok(const double* x, int n) {
    for (int c = 0; c < n; ++c)
        if (!(std::fabs(x[c]) <= kBlowUpGuard)) return false;  // catches NaN too
    return true;
}

}  // namespace

PredictionRun predict(const Model& model, const Mat& warmup, size_t steps) {
    model.config.validate();
    check_params(model.config, model.params);
    const int n = model.config.n;
    const int n_M = model.config.n_M;
    require(warmup.rows == static_cast<size_t>(n_M) + 1 &&
                warmup.cols == static_cast<size_t>(n),
            "predict: warmup must be an (n_M + 1) x n matrix");
    require(steps >= 1, "predict: steps must be >= 1");
    for (double v : warmup.a)
        require(std::fabs(v) <= kBlowUpGuard, "predict: warmup state beyond blow-up guard");

    PredictionRun run;
    run.warmup = warmup;
    run.dt = model.config.dt;
    run.requested_steps = steps;

    Vec window = warmup.a;  // rolling history, oldest first
    Mat out(steps, static_cast<size_t>(n));
    size_t valid = 0;
    for (size_t m = 0; m < steps; ++m) {
        forward_block(model.config, model.params, model.norm, window.data(), out.row(m));
        if (!row_ok(out.row(m), n)) {
            run.truncated = true;
            break;
        }
        valid += 1;
        std::memmove(window.data(), window.data() + n,
                     (window.size() - static_cast<size_t>(n)) * sizeof(double));
        std::memcpy(window.data() + (window.size() - static_cast<size_t>(n)), out.row(m),
                    static_cast<size_t>(n) * sizeof(double));
    }

    run.predicted = Mat(valid, static_cast<size_t>(n));
    std::memcpy(run.predicted.a.data(), out.a.data(), valid * n * sizeof(double));
    return run;
}

Mat make_warmup(const SystemSpec& spec, const std::vector<double>& x0,
                const std::vector<double>& alpha, int n_M, double dt, int substeps) {
    require(n_M >= 0, "make_warmup: n_M must be >= 0");
    Trajectory traj =
        integrate(spec, x0, alpha, dt, static_cast<size_t>(n_M) + 1, substeps);
    Mat warmup(traj.K, static_cast<size_t>(traj.n));
    warmup.a = traj.states;
    return warmup;
}

void attach_reference(PredictionRun& run, const Trajectory& reference) {
    const size_t n = run.predicted.cols;
    const size_t first = run.warmup.rows;  // global step of predicted row 0
    require(reference.n == static_cast<int>(n),
            "attach_reference: state dimensions differ");
    require(reference.dt == run.dt, "attach_reference: time steps differ");
    require(reference.K >= first + run.predicted.rows,
            "attach_reference: reference trajectory too short");

    Mat ref(run.predicted.rows, n);
    std::memcpy(ref.a.data(), reference.row(first), ref.a.size() * sizeof(double));
    run.reference = std::move(ref);
}

}  // namespace memflow
