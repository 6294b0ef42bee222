#include "memflow/adam.hpp"

#include <cmath>

#include "memflow/errors.hpp"

namespace memflow {

void AdamConfig::validate() const {
    // lr = 0 is allowed: the update becomes a no-op (useful as a frozen
    // dry run), and the rest of the state bookkeeping still advances.
    require(lr >= 0.0, "adam: lr must be >= 0");
    require(beta1 >= 0.0 && beta1 < 1.0, "adam: beta1 must lie in [0, 1)");
    require(beta2 >= 0.0 && beta2 < 1.0, "adam: beta2 must lie in [0, 1)");
    require(epsilon > 0.0, "adam: epsilon must be > 0");
}

AdamState make_adam_state(const ModelConfig& config) {
    AdamState s;
    s.m = make_params(config);
    s.v = make_params(config);
    return s;
}

namespace {

void update_span(const AdamConfig& cfg, double bc1, double bc2, double* theta,
                 double* m, double* v, const double* g, size_t count) {
    for (size_t i = 0; i < count; ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        theta[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

}  // namespace

void adam_update(const AdamConfig& config, AdamState& state, NetworkParams& params,
                 const NetworkParams& grad) {
    config.validate();
    require(params.same_shape(grad) && params.same_shape(state.m) &&
                params.same_shape(state.v),
            "adam_update: parameter / gradient / moment shapes disagree");

    state.t += 1;
    state.beta1_pow *= config.beta1;
    state.beta2_pow *= config.beta2;
    const double bc1 = 1.0 - state.beta1_pow;
    const double bc2 = 1.0 - state.beta2_pow;

    for (size_t l = 0; l < params.W.size(); ++l) {
        update_span(config, bc1, bc2, params.W[l].a.data(), state.m.W[l].a.data(),
                    state.v.W[l].a.data(), grad.W[l].a.data(), params.W[l].size());
        update_span(config, bc1, bc2, params.b[l].data(), state.m.b[l].data(),
                    state.v.b[l].data(), grad.b[l].data(), params.b[l].size());
    }
}

}  // namespace memflow
