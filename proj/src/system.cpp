#include "memflow/system.hpp"

#include <cmath>

#include "memflow/errors.hpp"
#include "memflow/kernels.hpp"

namespace memflow {

namespace {

// ---------------------------------------------------------------- constants

// CSTR (continuous stirred-tank reactor) fixed constants.
constexpr double kCstrB = 22.0;     // heat of reaction
constexpr double kCstrBeta = 3.0;   // heat transfer coefficient
constexpr double kCstrGamma = 12.0; // activation energy
constexpr double kCstrX2c = 0.5;    // coolant temperature
constexpr double kCstrDaNominal = 0.078;

// Cell signaling cascade fixed constants.
constexpr double kCellInput = 1.0;  // constant external input I
constexpr double kCellG4 = 0.2;     // feedback strength
constexpr double kCellKmNominal = 0.2;
constexpr std::array<double, 6> kCellVmaxNominal = {0.5, 0.15, 0.15, 0.15, 0.25, 0.05};

// Coupling matrix of the 20-d linear system, tabulated at 1000x its working
// magnitude (exactly as published); scaled once below.  Symmetric.
constexpr std::array<std::array<double, 10>, 10> kSigma22Times1e3 = {{
    {1500.0, 124.0, 814.0, -104.0, -179.0, -223.0, -731.0, -189.0, -400.0, 242.0},
    {124.0, 836.0, 679.0, 277.0, 197.0, -515.0, -52.1, -273.0, 101.0, 301.0},
    {814.0, 679.0, 1500.0, 651.0, 755.0, -605.0, -379.0, -546.0, -225.0, 223.0},
    {-104.0, 277.0, 651.0, 1960.0, 720.0, -782.0, -299.0, -775.0, -180.0, 506.0},
    {-179.0, 197.0, 755.0, 720.0, 2290.0, -973.0, 518.0, -19.1, -604.0, -369.0},
    {-223.0, -515.0, -605.0, -782.0, -973.0, 1290.0, -400.0, 412.0, 314.0, -420.0},
    {-731.0, -52.1, -379.0, -299.0, 518.0, -400.0, 1960.0, 68.3, 455.0, -316.0},
    {-189.0, -273.0, -546.0, -775.0, -19.1, 412.0, 68.3, 576.0, -53.6, -332.0},
    {-400.0, 101.0, -225.0, -180.0, -604.0, 314.0, 455.0, -53.6, 1030.0, 265.0},
    {242.0, 301.0, 223.0, 506.0, -369.0, -420.0, -316.0, -332.0, 265.0, 1090.0},
}};

const std::array<std::array<double, 10>, 10>& sigma22_scaled() {
    static const std::array<std::array<double, 10>, 10> scaled = [] {
        std::array<std::array<double, 10>, 10> s{};
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j) s[i][j] = kSigma22Times1e3[i][j] * 1e-3;
        return s;
    }();
    return scaled;
}

Box uniform_box(int dim, double lo, double hi) {
    Box b;
    b.axes.assign(static_cast<size_t>(dim), {lo, hi});
    return b;
}

Box pm10_box(const std::vector<double>& nominal) {
    Box b;
    for (double v : nominal) b.axes.push_back({0.9 * v, 1.1 * v});
    return b;
}

void check_finite(const SystemSpec& spec, const double* out, const char* term_hint) {
    for (int i = 0; i < spec.state_dim; ++i) {
        if (!std::isfinite(out[i]))
            throw DomainError(msgf(
                "eval_rhs(%s): component %d is non-finite (%s)",
                system_name(spec.id).c_str(), i, term_hint));
    }
}

}  // namespace

// ------------------------------------------------------------------ catalog

std::string system_name(SystemId id) {
    switch (id) {
        case SystemId::Pendulum: return "pendulum";
        case SystemId::Linear20: return "linear20";
        case SystemId::Cstr: return "cstr";
        case SystemId::CellCascade: return "cell";
    }
    throw ContractViolation("system_name: invalid SystemId");
}

SystemId parse_system_id(const std::string& name) {
    if (name == "pendulum") return SystemId::Pendulum;
    if (name == "linear20") return SystemId::Linear20;
    if (name == "cstr") return SystemId::Cstr;
    if (name == "cell" || name == "cellcascade") return SystemId::CellCascade;
    throw ConfigError(msgf(
        "unknown system '%s' (expected one of: pendulum, linear20, cstr, cell)",
        name.c_str()));
}

const std::array<std::array<double, 10>, 10>& linear20_sigma22() {
    return sigma22_scaled();
}

SystemSpec make_system(SystemId id) {
    SystemSpec s;
    s.id = id;
    switch (id) {
        case SystemId::Pendulum: {
            s.state_dim = 2;
            s.param_dim = 2;
            s.state_domain.axes = {{-0.5, 0.5}, {-1.6, 1.6}};
            s.param_domain.axes = {{0.05, 0.15}, {8.0, 10.0}};  // damping, stiffness
            break;
        }
        case SystemId::Linear20: {
            s.state_dim = 20;
            s.param_dim = 100;  // the 10x10 coupling block, flattened row-major
            s.state_domain = uniform_box(20, -2.0, 2.0);
            s.param_domain = uniform_box(100, -0.05, 0.05);
            Mat sig(10, 10);
            for (int i = 0; i < 10; ++i)
                for (int j = 0; j < 10; ++j) sig.at(i, j) = sigma22_scaled()[i][j];
            s.matrix_constants.emplace("Sigma22", std::move(sig));
            break;
        }
        case SystemId::Cstr: {
            s.state_dim = 2;
            s.param_dim = 1;  // Damkoehler number
            s.state_domain.axes = {{0.1, 1.0}, {0.5, 5.5}};
            s.param_domain.axes = {{0.9 * kCstrDaNominal, 1.1 * kCstrDaNominal}};
            s.scalar_constants = {{"B", kCstrB},
                                  {"beta", kCstrBeta},
                                  {"gamma", kCstrGamma},
                                  {"x2c", kCstrX2c}};
            break;
        }
        case SystemId::CellCascade: {
            s.state_dim = 3;
            s.param_dim = 12;  // Km_1..Km_6 then Vmax_1..Vmax_6
            s.state_domain = uniform_box(3, 0.0, 1.0);
            std::vector<double> nominal(12);
            for (int i = 0; i < 6; ++i) nominal[static_cast<size_t>(i)] = kCellKmNominal;
            for (int i = 0; i < 6; ++i)
                nominal[static_cast<size_t>(6 + i)] = kCellVmaxNominal[static_cast<size_t>(i)];
            s.param_domain = pm10_box(nominal);
            s.scalar_constants = {{"I", kCellInput}, {"G4", kCellG4}};
            break;
        }
    }
    return s;
}

SystemSpec make_system(const std::string& name) { return make_system(parse_system_id(name)); }

// ---------------------------------------------------------------- dynamics

void eval_rhs_raw(const SystemSpec& spec, const double* x, const double* alpha,
                  double* out) {
    switch (spec.id) {
        case SystemId::Pendulum: {
            // x = (angle, angular velocity); alpha = (damping, stiffness)
            out[0] = x[1];
            out[1] = -alpha[0] * x[1] - alpha[1] * std::sin(x[0]);
            check_finite(spec, out, "damped oscillator terms");
            return;
        }
        case SystemId::Linear20: {
            // x = (p_1..p_10, q_1..q_10); alpha = hidden 10x10 block, row-major.
            const double* p = x;
            const double* q = x + 10;
            const auto& s22 = sigma22_scaled();
            for (int i = 0; i < 10; ++i) out[i] = q[i];
            for (int i = 0; i < 10; ++i) {
                double v = -p[i];
                v -= dot4(alpha + 10 * i, p, 10);   // hidden coupling row i
                v -= dot4(s22[static_cast<size_t>(i)].data(), q, 10);
                out[10 + i] = v;
            }
            check_finite(spec, out, "linear coupling terms");
            return;
        }
        case SystemId::Cstr: {
            // x = (conversion, temperature); alpha = (Da)
            double da = alpha[0];
            double denom = 1.0 + x[1] / kCstrGamma;
            double reaction = da * (1.0 - x[0]) * std::exp(x[1] / denom);
            out[0] = -x[0] + reaction;
            out[1] = -x[1] + kCstrB * reaction - kCstrBeta * (x[1] - kCstrX2c);
            check_finite(spec, out, "reaction exponential exp(x2/(1+x2/gamma))");
            return;
        }
        case SystemId::CellCascade: {
            // x = enzyme activation levels (e1, e2, e3) in [0,1];
            // alpha = (Km_1..Km_6, Vmax_1..Vmax_6)
            const double* km = alpha;
            const double* vmax = alpha + 6;
            double e1 = x[0], e2 = x[1], e3 = x[2];
            double drive1 = kCellInput / (1.0 + kCellG4 * e3);  // feedback-inhibited input
            out[0] = drive1 * vmax[0] * (1.0 - e1) / (km[0] + (1.0 - e1)) -
                     vmax[1] * e1 / (km[1] + e1);
            out[1] = vmax[2] * e1 * (1.0 - e2) / (km[2] + (1.0 - e2)) -
                     vmax[3] * e2 / (km[3] + e2);
            out[2] = vmax[4] * e2 * (1.0 - e3) / (km[4] + (1.0 - e3)) -
                     vmax[5] * e3 / (km[5] + e3);
            check_finite(spec, out, "Michaelis-Menten kinetics terms");
            return;
        }
    }
    throw ContractViolation("eval_rhs_raw: invalid SystemId");
}

std::vector<double> eval_rhs(const SystemSpec& spec, const std::vector<double>& x,
                             const std::vector<double>& alpha) {
    require(static_cast<int>(x.size()) == spec.state_dim,
            msgf("eval_rhs(%s): state has %zu entries, expected %d",
                 system_name(spec.id).c_str(), x.size(), spec.state_dim));
    require(static_cast<int>(alpha.size()) == spec.param_dim,
            msgf("eval_rhs(%s): parameter vector has %zu entries, expected %d",
                 system_name(spec.id).c_str(), alpha.size(), spec.param_dim));
    std::vector<double> out(static_cast<size_t>(spec.state_dim));
    eval_rhs_raw(spec, x.data(), alpha.data(), out.data());
    return out;
}

// ---------------------------------------------------------------- sampling

namespace {
std::vector<double> sample_box(const Box& box, RngStream& rng) {
    std::vector<double> v(box.axes.size());
    for (size_t i = 0; i < box.axes.size(); ++i)
        v[i] = rng.uniform(box.axes[i][0], box.axes[i][1]);
    return v;
}
}  // namespace

std::vector<double> sample_initial_condition(const SystemSpec& spec, RngStream& rng) {
    return sample_box(spec.state_domain, rng);
}

std::vector<double> sample_parameters(const SystemSpec& spec, RngStream& rng) {
    return sample_box(spec.param_domain, rng);
}

}  // namespace memflow
