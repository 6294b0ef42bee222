#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "memflow/system.hpp"

namespace memflow {

// One solution trajectory sampled at a fixed step: row k is the state at
// time k * dt.  debug_params carries the hidden parameter vector ONLY when
// data generation ran with the debug flag; such trajectories are for
// inspection and are refused by the dataset builder.
struct Trajectory {
    double dt = 0.0;
    int n = 0;
    size_t K = 0;                      // number of rows
    std::vector<double> states;        // K x n, row-major
    std::optional<std::vector<double>> debug_params;

    double* row(size_t k) { return states.data() + k * static_cast<size_t>(n); }
    const double* row(size_t k) const { return states.data() + k * static_cast<size_t>(n); }
};

// Any |component| beyond this is treated as a blow-up during integration.
constexpr double kBlowUpGuard = 1e6;

// Generic autonomous right-hand side: writes dx/dt for the given state.
using RhsFn = std::function<void(const double* x, double* dxdt)>;

// Classical 4th-order Runge-Kutta update, generic form (test seam for
// synthetic vector fields) and catalog form.
std::vector<double> rk4_step(const RhsFn& rhs, int n, const std::vector<double>& x, double h);
std::vector<double> rk4_step(const SystemSpec& spec, const std::vector<double>& x,
                             const std::vector<double>& alpha, double h);

// March K-1 recorded steps of size dt from x0; each recorded step is
// `substeps` internal rk4 updates of size dt/substeps.  Throws
// TruncationError when the blow-up guard trips, reporting the last valid
// row index.
Trajectory integrate(const RhsFn& rhs, int n, const std::vector<double>& x0, double dt,
                     size_t K, int substeps);
Trajectory integrate(const SystemSpec& spec, const std::vector<double>& x0,
                     const std::vector<double>& alpha, double dt, size_t K, int substeps,
                     bool record_debug_params = false);

}  // namespace memflow
