#pragma once

#include <cstdint>

#include "memflow/network.hpp"

namespace memflow {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

// First/second moment estimates plus the step counter.  The running
// beta powers are carried explicitly so a restored optimizer continues
// bit-exactly where it stopped.
struct AdamState {
    uint64_t t = 0;
    double beta1_pow = 1.0;  // beta1^t
    double beta2_pow = 1.0;  // beta2^t
    NetworkParams m;
    NetworkParams v;
};

// Zero-moment state shaped like the given parameters.
AdamState make_adam_state(const ModelConfig& config);

// One Adam step, in place:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
//   theta -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
// Parameters, gradient and moments are walked in one fixed order, so the
// update is deterministic.
void adam_update(const AdamConfig& config, AdamState& state, NetworkParams& params,
                 const NetworkParams& grad);

}  // namespace memflow
