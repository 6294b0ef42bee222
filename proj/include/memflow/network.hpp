#pragma once

#include <cstdint>
#include <vector>

#include "memflow/matrix.hpp"

namespace memflow {

// Hidden-layer nonlinearity; the output layer is always linear.
enum class Activation { Relu };

// Architecture of the memory-augmented residual step model
//
//     x_{k+1} = x_k + f(z_k),    z_k = [x_k, x_{k-1}, ..., x_{k-n_M}]
//
// where f is a fully connected network on the concatenated history z_k
// (newest state first) and the training loss unrolls the step n_R times
// with shared parameters.
struct ModelConfig {
    int n = 0;     // state dimension
    int n_M = 0;   // memory depth: the history holds n_M + 1 states
    int n_R = 1;   // recurrent steps the training loss unrolls (>= 1)
    double dt = 0.0;  // sampling interval of the data the model steps over
    std::vector<int> hidden_widths{30, 30, 30};
    Activation activation = Activation::Relu;

    int input_dim() const { return n * (n_M + 1); }
    int output_dim() const { return n; }
    int layer_count() const { return static_cast<int>(hidden_widths.size()) + 1; }

    // Widths including input and output: {D, w_0, ..., w_{H-1}, n}.
    std::vector<int> layer_widths() const;

    // Throws ContractViolation on nonsense (n < 1, n_R < 1, dt <= 0,
    // nonpositive hidden width).  hidden_widths may be empty, which makes
    // f a single affine map.
    void validate() const;
};

// Dense parameters: one weight matrix and bias vector per layer.  The same
// shape doubles as the gradient container.
struct NetworkParams {
    std::vector<Mat> W;  // W[l] has shape width_{l+1} x width_l
    std::vector<Vec> b;  // b[l] has length width_{l+1}

    size_t scalar_count() const;
    void set_zero();
    bool same_shape(const NetworkParams& o) const;

    friend bool operator==(const NetworkParams& x, const NetworkParams& y) {
        return x.W == y.W && x.b == y.b;
    }
};

// Allocates zeroed parameters with the shapes the config dictates.
NetworkParams make_params(const ModelConfig& config);

// He-style initialization: W[l] ~ Normal(0, 2 / fan_in), biases zero.
// Draw order is layer-by-layer, row-major, so a seed pins every weight.
NetworkParams init_params(const ModelConfig& config, uint64_t seed);

// Throws ContractViolation if the parameter shapes do not match the config.
void check_params(const ModelConfig& config, const NetworkParams& params);

// Optional per-component input standardization.  When enabled, every state
// block inside z_k is mapped component-wise to (x - mean) * inv_std before
// entering f; the model still steps raw states.  Empty vectors mean "off".
struct Normalization {
    Vec mean;   // length n, or empty
    Vec stdev;  // length n, or empty

    bool enabled() const { return !mean.empty(); }
    void validate(int n) const;
};

// Computes per-component mean / standard deviation over every state block
// of the given history rows (each row = n_M + 1 states of width n).  The
// idx form restricts the fit to the selected rows.
Normalization fit_normalization(const Mat& x_in, int n);
Normalization fit_normalization(const Mat& x_in, int n, const size_t* idx, size_t count);

// A runnable model: everything prediction needs, nothing it must not see
// (no hidden system parameters anywhere in here).
struct Model {
    ModelConfig config;
    NetworkParams params;
    Normalization norm;
};

// --- Forward -----------------------------------------------------------

// Applies one model step.  `history` holds n_M + 1 states of width n,
// oldest first; `x_next` receives the predicted next state (width n).
void forward_block(const ModelConfig& config, const NetworkParams& params,
                   const Normalization& norm, const double* history, double* x_next);

// Applies `steps` model steps from one history row (oldest first),
// feeding each prediction back in.  Returns a steps x n matrix.
Mat recurrent_forward(const ModelConfig& config, const NetworkParams& params,
                      const Normalization& norm, const Vec& history, int steps);

// --- Loss and gradient --------------------------------------------------

// Mean over samples of the squared prediction error summed over all n_R
// unrolled steps and all n components.  Rows of x_in / y_out follow the
// dataset layout.  Accumulation is per-sample first, then across samples
// in row order, then one division, so the value is reproducible bit for
// bit and decomposes exactly over sample subsets.
double batch_loss(const ModelConfig& config, const NetworkParams& params,
                  const Normalization& norm, const Mat& x_in, const Mat& y_out);

// Same loss restricted to the rows selected by `idx` (in idx order).
double batch_loss(const ModelConfig& config, const NetworkParams& params,
                  const Normalization& norm, const Mat& x_in, const Mat& y_out,
                  const size_t* idx, size_t count);

struct LossGrad {
    double loss = 0.0;
    NetworkParams grad;
    // Smallest |pre-activation| seen on any hidden unit during the forward
    // pass; +inf when there are no hidden layers.  Finite-difference checks
    // use it to detect configurations sitting on a ReLU kink.
    double min_abs_preact = 0.0;
};

// Loss plus its gradient over the batch selected by `idx` (row indices
// into x_in / y_out; `count` of them).  Backpropagates through all n_R
// unrolled steps including the feedback of predictions into later inputs.
LossGrad grad_loss(const ModelConfig& config, const NetworkParams& params,
                   const Normalization& norm, const Mat& x_in, const Mat& y_out,
                   const size_t* idx, size_t count);

}  // namespace memflow
