#include "memflow/integrate.hpp"

#include <cmath>
#include <iostream>

#include "memflow/errors.hpp"

namespace memflow {

namespace {

// One RK4 update into `out`; scratch must hold 5*n doubles.
void rk4_step_into(const RhsFn& rhs, int n, const double* x, double h, double* out,
                   double* scratch) {
    const size_t un = static_cast<size_t>(n);
    double* k1 = scratch;
    double* k2 = scratch + un;
    double* k3 = scratch + 2 * un;
    double* k4 = scratch + 3 * un;
    double* xt = scratch + 4 * un;

    rhs(x, k1);
    for (size_t i = 0; i < un; ++i) xt[i] = x[i] + 0.5 * h * k1[i];
    rhs(xt, k2);
    for (size_t i = 0; i < un; ++i) xt[i] = x[i] + 0.5 * h * k2[i];
    rhs(xt, k3);
    for (size_t i = 0; i < un; ++i) xt[i] = x[i] + h * k3[i];
    rhs(xt, k4);
    for (size_t i = 0; i < un; ++i)
        out[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (size_t i = 0; i < un; ++i) {
        if (!std::isfinite(out[i]))
            throw DomainError(msgf("rk4_step: non-finite stage result in component %zu", i));
    }
}

bool exceeds_guard(const double* x, int n) {
    for (int i = 0; i < n; ++i)
        if (!(std::fabs(x[i]) <= kBlowUpGuard)) return true;  // catches NaN too
    return false;
}

}  // namespace

std::vector<double> rk4_step(const RhsFn& rhs, int n, const std::vector<double>& x,
                             double h) {
    require(n >= 1, "rk4_step: state dimension must be >= 1");
    require(static_cast<int>(x.size()) == n,
            msgf("rk4_step: state has %zu entries, expected %d", x.size(), n));
    require(h > 0.0 && std::isfinite(h), "rk4_step: step size must be positive and finite");
    for (int i = 0; i < n; ++i)
        require(std::isfinite(x[static_cast<size_t>(i)]),
                msgf("rk4_step: input component %d is not finite", i));
    std::vector<double> out(static_cast<size_t>(n));
    std::vector<double> scratch(5 * static_cast<size_t>(n));
    rk4_step_into(rhs, n, x.data(), h, out.data(), scratch.data());
    return out;
}

std::vector<double> rk4_step(const SystemSpec& spec, const std::vector<double>& x,
                             const std::vector<double>& alpha, double h) {
    require(static_cast<int>(alpha.size()) == spec.param_dim,
            msgf("rk4_step(%s): parameter vector has %zu entries, expected %d",
                 system_name(spec.id).c_str(), alpha.size(), spec.param_dim));
    const double* a = alpha.data();
    RhsFn rhs = [&spec, a](const double* xs, double* dx) { eval_rhs_raw(spec, xs, a, dx); };
    return rk4_step(rhs, spec.state_dim, x, h);
}

Trajectory integrate(const RhsFn& rhs, int n, const std::vector<double>& x0, double dt,
                     size_t K, int substeps) {
    require(n >= 1, "integrate: state dimension must be >= 1");
    require(static_cast<int>(x0.size()) == n,
            msgf("integrate: x0 has %zu entries, expected %d", x0.size(), n));
    require(dt > 0.0 && std::isfinite(dt), "integrate: dt must be positive and finite");
    require(K >= 1, "integrate: K must be >= 1");
    require(substeps >= 1, "integrate: substeps must be >= 1");

    Trajectory traj;
    traj.dt = dt;
    traj.n = n;
    traj.K = K;
    traj.states.assign(K * static_cast<size_t>(n), 0.0);
    std::copy(x0.begin(), x0.end(), traj.row(0));
    if (exceeds_guard(traj.row(0), n))
        throw TruncationError("integrate: initial state exceeds the blow-up guard", 0);

    const double h = dt / static_cast<double>(substeps);
    std::vector<double> scratch(5 * static_cast<size_t>(n));
    std::vector<double> cur(x0);
    std::vector<double> nxt(static_cast<size_t>(n));
    for (size_t k = 1; k < K; ++k) {
        for (int s = 0; s < substeps; ++s) {
            try {
                rk4_step_into(rhs, n, cur.data(), h, nxt.data(), scratch.data());
            } catch (const DomainError&) {
                throw TruncationError(
                    msgf("integrate: blow-up at row %zu (last valid row %zu)", k, k - 1),
                    k - 1);
            }
            cur.swap(nxt);
        }
        if (exceeds_guard(cur.data(), n))
            throw TruncationError(
                msgf("integrate: |component| > %g at row %zu (last valid row %zu)",
                     kBlowUpGuard, k, k - 1),
                k - 1);
        std::copy(cur.begin(), cur.end(), traj.row(k));
    }
    return traj;
}

Trajectory integrate(const SystemSpec& spec, const std::vector<double>& x0,
                     const std::vector<double>& alpha, double dt, size_t K, int substeps,
                     bool record_debug_params) {
    require(static_cast<int>(alpha.size()) == spec.param_dim,
            msgf("integrate(%s): parameter vector has %zu entries, expected %d",
                 system_name(spec.id).c_str(), alpha.size(), spec.param_dim));
    if (static_cast<int>(x0.size()) == spec.state_dim &&
        !spec.state_domain.contains(x0.data())) {
        std::cerr << "warning: integrate(" << system_name(spec.id)
                  << "): initial condition lies outside the state domain\n";
    }
    const double* a = alpha.data();
    RhsFn rhs = [&spec, a](const double* xs, double* dx) { eval_rhs_raw(spec, xs, a, dx); };
    Trajectory traj = integrate(rhs, spec.state_dim, x0, dt, K, substeps);
    if (record_debug_params) traj.debug_params = alpha;
    return traj;
}

}  // namespace memflow
