#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "memflow/matrix.hpp"
#include "memflow/rng.hpp"

namespace memflow {

// The catalog of built-in reference systems is closed; these four are the
// "true" models used only to synthesize data and validation references.
enum class SystemId { Pendulum, Linear20, Cstr, CellCascade };

// Axis-aligned box in R^k.
struct Box {
    std::vector<std::array<double, 2>> axes;  // per-axis {lo, hi}

    int dim() const { return static_cast<int>(axes.size()); }
    bool contains(const double* x) const {
        for (size_t i = 0; i < axes.size(); ++i)
            if (x[i] < axes[i][0] || x[i] > axes[i][1]) return false;
        return true;
    }
};

struct SystemSpec {
    SystemId id = SystemId::Pendulum;
    int state_dim = 0;  // n
    int param_dim = 0;  // d
    Box state_domain;   // sampling box for initial conditions
    Box param_domain;   // sampling box for hidden parameters
    // Fixed (non-hidden) constants, for introspection and documentation.
    // The right-hand-side evaluation uses compiled-in copies of the same
    // values; these maps are the authoritative public echo.
    std::map<std::string, double> scalar_constants;
    std::map<std::string, Mat> matrix_constants;
};

std::string system_name(SystemId id);
SystemId parse_system_id(const std::string& name);
SystemSpec make_system(SystemId id);
SystemSpec make_system(const std::string& name);

// The fixed coupling matrix of the 20-dimensional linear system (entries
// already scaled to their working magnitude; symmetric by construction).
const std::array<std::array<double, 10>, 10>& linear20_sigma22();

// f(x, alpha) for the catalog system.  `x` has spec.state_dim entries,
// `alpha` spec.param_dim, `out` spec.state_dim.  Dimensions are the
// caller's responsibility here (hot path); use eval_rhs for the checked
// version.  Throws DomainError if the result is non-finite.
void eval_rhs_raw(const SystemSpec& spec, const double* x, const double* alpha,
                  double* out);

// Checked wrapper: validates dimensions, returns the derivative.
std::vector<double> eval_rhs(const SystemSpec& spec, const std::vector<double>& x,
                             const std::vector<double>& alpha);

// Component-wise uniform draws over the spec's boxes.
std::vector<double> sample_initial_condition(const SystemSpec& spec, RngStream& rng);
std::vector<double> sample_parameters(const SystemSpec& spec, RngStream& rng);

}  // namespace memflow
