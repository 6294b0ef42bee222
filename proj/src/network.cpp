#include "memflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "memflow/errors.hpp"
#include "memflow/kernels.hpp"
#include "memflow/rng.hpp"

namespace memflow {

std::vector<int> ModelConfig::layer_widths() const {
    std::vector<int> w;
    w.reserve(hidden_widths.size() + 2);
    w.push_back(input_dim());
    for (int h : hidden_widths) w.push_back(h);
    w.push_back(output_dim());
    return w;
}

void ModelConfig::validate() const {
    require(n >= 1, "model config: n must be >= 1");
    require(n_M >= 0, "model config: n_M must be >= 0");
    require(n_R >= 1, "model config: n_R must be >= 1");
    require(dt > 0.0, "model config: dt must be > 0");
    for (int h : hidden_widths)
        require(h >= 1, "model config: hidden widths must be >= 1");
    require(activation == Activation::Relu, "model config: unknown activation");
}

size_t NetworkParams::scalar_count() const {
    size_t total = 0;
    for (const Mat& w : W) total += w.size();
    for (const Vec& v : b) total += v.size();
    return total;
}

void NetworkParams::set_zero() {
    for (Mat& w : W) w.zero();
    for (Vec& v : b) std::fill(v.begin(), v.end(), 0.0);
}

bool NetworkParams::same_shape(const NetworkParams& o) const {
    if (W.size() != o.W.size() || b.size() != o.b.size()) return false;
    for (size_t l = 0; l < W.size(); ++l)
        if (!W[l].same_shape(o.W[l]) || b[l].size() != o.b[l].size()) return false;
    return true;
}

NetworkParams make_params(const ModelConfig& config) {
    config.validate();
    const std::vector<int> widths = config.layer_widths();
    NetworkParams p;
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
        p.W.emplace_back(static_cast<size_t>(widths[l + 1]), static_cast<size_t>(widths[l]));
        p.b.emplace_back(static_cast<size_t>(widths[l + 1]), 0.0);
    }
    return p;
}

NetworkParams init_params(const ModelConfig& config, uint64_t seed) {
    NetworkParams p = make_params(config);
    RngStream stream(seed);
    for (Mat& w : p.W) {
        const double scale = std::sqrt(2.0 / static_cast<double>(w.cols));
        for (double& v : w.a) v = scale * stream.normal();
    }
    return p;  // biases stay zero
}

void check_params(const ModelConfig& config, const NetworkParams& params) {
    const std::vector<int> widths = config.layer_widths();
    require(params.W.size() + 1 == widths.size() && params.b.size() == params.W.size(),
            "network: parameter layer count does not match the config");
    for (size_t l = 0; l < params.W.size(); ++l) {
        require(params.W[l].rows == static_cast<size_t>(widths[l + 1]) &&
                    params.W[l].cols == static_cast<size_t>(widths[l]) &&
                    params.b[l].size() == static_cast<size_t>(widths[l + 1]),
                msgf("network: layer %zu parameter shape does not match the config", l));
    }
}

void Normalization::validate(int n) const {
    require(mean.size() == stdev.size(),
            "normalization: mean and stdev must have equal length");
    if (!enabled()) return;
    require(static_cast<int>(mean.size()) == n,
            "normalization: vectors must have length n");
    for (double s : stdev)
        require(std::isfinite(s) && s >= 0.0, "normalization: stdev must be finite and >= 0");
    for (double m : mean) require(std::isfinite(m), "normalization: mean must be finite");
}

Normalization fit_normalization(const Mat& x_in, int n, const size_t* idx,
                                size_t count) {
    require(n >= 1, "fit_normalization: n must be >= 1");
    require(idx != nullptr && count >= 1, "fit_normalization: no rows");
    require(x_in.cols % static_cast<size_t>(n) == 0,
            "fit_normalization: row width is not a multiple of n");
    for (size_t i = 0; i < count; ++i)
        require(idx[i] < x_in.rows, "fit_normalization: row index out of range");
    const size_t blocks_per_row = x_in.cols / static_cast<size_t>(n);
    const double denom = static_cast<double>(count * blocks_per_row);

    Normalization norm;
    norm.mean.assign(static_cast<size_t>(n), 0.0);
    norm.stdev.assign(static_cast<size_t>(n), 0.0);
    for (size_t i = 0; i < count; ++i) {
        const double* row = x_in.row(idx[i]);
        for (size_t jb = 0; jb < blocks_per_row; ++jb)
            for (int c = 0; c < n; ++c) norm.mean[c] += row[jb * n + c];
    }
    for (int c = 0; c < n; ++c) norm.mean[c] /= denom;
    for (size_t i = 0; i < count; ++i) {
        const double* row = x_in.row(idx[i]);
        for (size_t jb = 0; jb < blocks_per_row; ++jb)
            for (int c = 0; c < n; ++c) {
                const double d = row[jb * n + c] - norm.mean[c];
                norm.stdev[c] += d * d;
            }
    }
    for (int c = 0; c < n; ++c) norm.stdev[c] = std::sqrt(norm.stdev[c] / denom);
    return norm;
}

Normalization fit_normalization(const Mat& x_in, int n) {
    require(x_in.rows >= 1, "fit_normalization: no rows");
    std::vector<size_t> idx(x_in.rows);
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return fit_normalization(x_in, n, idx.data(), idx.size());
}

// ---------------------------------------------------------------------------
// Internals shared by every forward / backward path.  All per-element
// arithmetic goes through the pinned kernels, so single-history and batched
// evaluation produce bit-identical numbers.
// ---------------------------------------------------------------------------

namespace {

struct NormView {
    bool on = false;
    const double* mean = nullptr;
    Vec inv;  // 1 / max(stdev, 1e-12)
};

NormView make_norm_view(const Normalization& norm, int n) {
    norm.validate(n);
    NormView v;
    v.on = norm.enabled();
    if (v.on) {
        v.mean = norm.mean.data();
        v.inv.resize(norm.stdev.size());
        for (size_t c = 0; c < norm.stdev.size(); ++c)
            v.inv[c] = 1.0 / std::max(norm.stdev[c], 1e-12);
    }
    return v;
}

// Copies one state (width n) into an input block, standardizing if enabled.
inline void put_block(const NormView& nv, int n, const double* state, double* dst) {
    if (nv.on) {
        for (int c = 0; c < n; ++c) dst[c] = (state[c] - nv.mean[c]) * nv.inv[c];
    } else {
        std::memcpy(dst, state, static_cast<size_t>(n) * sizeof(double));
    }
}

// One dense layer applied to one row: out[i] = dot(in, W_i) + b_i.
inline void layer_row(const Mat& W, const Vec& b, const double* in, double* out) {
    for (size_t i = 0; i < W.rows; ++i) out[i] = dot4(in, W.row(i), W.cols) + b[i];
}

// In-place ReLU on one row; optionally tracks the smallest |pre-activation|.
inline void relu_row(double* v, size_t m, double* min_abs) {
    for (size_t i = 0; i < m; ++i) {
        const double p = v[i];
        if (min_abs != nullptr) {
            const double a = std::fabs(p);
            if (a < *min_abs) *min_abs = a;
        }
        v[i] = p > 0.0 ? p : 0.0;
    }
}

// Assembles the network input from history states addressed newest-first:
// block j of z is get_state(j) = x_{k-j}, standardized if enabled.
template <typename GetState>
inline void assemble_row(const NormView& nv, int n, int n_M, GetState&& get_state,
                         double* z) {
    for (int j = 0; j <= n_M; ++j) put_block(nv, n, get_state(j), z + j * n);
}

}  // namespace

void forward_block(const ModelConfig& config, const NetworkParams& params,
                   const Normalization& norm, const double* history, double* x_next) {
    check_params(config, params);
    const NormView nv = make_norm_view(norm, config.n);
    const int n = config.n;
    const std::vector<int> widths = config.layer_widths();
    const int L = config.layer_count();

    Vec z(static_cast<size_t>(widths[0]));
    // `history` is oldest first; block j wants the j-th newest state.
    assemble_row(
        nv, n, config.n_M,
        [&](int j) { return history + static_cast<size_t>(config.n_M - j) * n; },
        z.data());

    Vec cur = std::move(z), nxt;
    for (int l = 0; l < L; ++l) {
        nxt.assign(static_cast<size_t>(widths[l + 1]), 0.0);
        layer_row(params.W[l], params.b[l], cur.data(), nxt.data());
        if (l < L - 1) relu_row(nxt.data(), nxt.size(), nullptr);
        cur = std::move(nxt);
    }
    const double* newest = history + static_cast<size_t>(config.n_M) * n;
    for (int c = 0; c < n; ++c) x_next[c] = newest[c] + cur[c];
}

Mat recurrent_forward(const ModelConfig& config, const NetworkParams& params,
                      const Normalization& norm, const Vec& history, int steps) {
    require(steps >= 1, "recurrent_forward: steps must be >= 1");
    const int n = config.n;
    require(history.size() == static_cast<size_t>(config.input_dim()),
            "recurrent_forward: history must hold n_M + 1 states");

    Vec window = history;  // rolling, oldest first
    Mat out(static_cast<size_t>(steps), static_cast<size_t>(n));
    for (int s = 0; s < steps; ++s) {
        forward_block(config, params, norm, window.data(), out.row(s));
        // slide: drop the oldest state, append the prediction
        std::memmove(window.data(), window.data() + n,
                     (window.size() - static_cast<size_t>(n)) * sizeof(double));
        std::memcpy(window.data() + (window.size() - static_cast<size_t>(n)), out.row(s),
                    static_cast<size_t>(n) * sizeof(double));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

namespace {

void check_loss_inputs(const ModelConfig& config, const NetworkParams& params,
                       const Mat& x_in, const Mat& y_out) {
    check_params(config, params);
    require(x_in.cols == static_cast<size_t>(config.input_dim()),
            "loss: x_in width does not match n * (n_M + 1)");
    require(y_out.cols == static_cast<size_t>(config.n) * static_cast<size_t>(config.n_R),
            "loss: y_out width does not match n * n_R");
    require(x_in.rows == y_out.rows, "loss: x_in and y_out row counts differ");
    require(x_in.rows >= 1, "loss: empty batch");
}

// Squared error of one sample across the whole unroll, accumulated in a
// fixed order (step-major, then component).  Shared by both loss paths.
struct SampleUnroll {
    const ModelConfig& config;
    const NetworkParams& params;
    const NormView& nv;
    std::vector<int> widths;
    Vec timeline;  // (n_M + 1 + n_R) * n raw states
    Vec z, h_cur, h_nxt;

    SampleUnroll(const ModelConfig& cfg, const NetworkParams& p, const NormView& view)
        : config(cfg), params(p), nv(view), widths(cfg.layer_widths()) {
        timeline.resize(static_cast<size_t>(cfg.n_M + 1 + cfg.n_R) *
                        static_cast<size_t>(cfg.n));
        z.resize(static_cast<size_t>(widths.front()));
    }

    double* state(int t) { return timeline.data() + static_cast<size_t>(t) * config.n; }

    double run(const double* x_row, const double* y_row) {
        const int n = config.n;
        std::memcpy(timeline.data(), x_row,
                    static_cast<size_t>(config.n_M + 1) * n * sizeof(double));
        for (int r = 0; r < config.n_R; ++r) {
            assemble_row(
                nv, n, config.n_M, [&](int j) { return state(config.n_M + r - j); },
                z.data());
            const int L = config.layer_count();
            h_cur.assign(z.begin(), z.end());
            for (int l = 0; l < L; ++l) {
                h_nxt.assign(static_cast<size_t>(widths[l + 1]), 0.0);
                layer_row(params.W[l], params.b[l], h_cur.data(), h_nxt.data());
                if (l < L - 1) relu_row(h_nxt.data(), h_nxt.size(), nullptr);
                std::swap(h_cur, h_nxt);
            }
            const double* prev = state(config.n_M + r);
            double* next = state(config.n_M + 1 + r);
            for (int c = 0; c < n; ++c) next[c] = prev[c] + h_cur[c];
        }
        double acc = 0.0;
        for (int r = 0; r < config.n_R; ++r) {
            const double* pred = state(config.n_M + 1 + r);
            for (int c = 0; c < n; ++c) {
                const double d = pred[c] - y_row[static_cast<size_t>(r) * n + c];
                acc += d * d;
            }
        }
        return acc;
    }
};

}  // namespace

double batch_loss(const ModelConfig& config, const NetworkParams& params,
                  const Normalization& norm, const Mat& x_in, const Mat& y_out) {
    check_loss_inputs(config, params, x_in, y_out);
    const NormView nv = make_norm_view(norm, config.n);
    SampleUnroll unroll(config, params, nv);
    double total = 0.0;
    for (size_t i = 0; i < x_in.rows; ++i) total += unroll.run(x_in.row(i), y_out.row(i));
    return total / static_cast<double>(x_in.rows);
}

double batch_loss(const ModelConfig& config, const NetworkParams& params,
                  const Normalization& norm, const Mat& x_in, const Mat& y_out,
                  const size_t* idx, size_t count) {
    check_loss_inputs(config, params, x_in, y_out);
    require(idx != nullptr && count >= 1, "batch_loss: empty index set");
    for (size_t i = 0; i < count; ++i)
        require(idx[i] < x_in.rows, "batch_loss: sample index out of range");
    const NormView nv = make_norm_view(norm, config.n);
    SampleUnroll unroll(config, params, nv);
    double total = 0.0;
    for (size_t i = 0; i < count; ++i)
        total += unroll.run(x_in.row(idx[i]), y_out.row(idx[i]));
    return total / static_cast<double>(count);
}

LossGrad grad_loss(const ModelConfig& config, const NetworkParams& params,
                   const Normalization& norm, const Mat& x_in, const Mat& y_out,
                   const size_t* idx, size_t count) {
    check_loss_inputs(config, params, x_in, y_out);
    require(idx != nullptr && count >= 1, "grad_loss: empty index set");
    for (size_t i = 0; i < count; ++i)
        require(idx[i] < x_in.rows, "grad_loss: sample index out of range");

    const NormView nv = make_norm_view(norm, config.n);
    const int n = config.n;
    const int n_M = config.n_M;
    const int n_R = config.n_R;
    const int L = config.layer_count();
    const std::vector<int> widths = config.layer_widths();
    const size_t B = count;

    LossGrad result;
    result.grad = make_params(config);
    result.min_abs_preact = std::numeric_limits<double>::infinity();

    // timeline[t]: B x n raw states; t in [0, n_M] is given history,
    // t = n_M + 1 + r is the step-r prediction.
    std::vector<Mat> timeline(static_cast<size_t>(n_M + 1 + n_R));
    for (int t = 0; t <= n_M; ++t) {
        timeline[t] = Mat(B, static_cast<size_t>(n));
        for (size_t i = 0; i < B; ++i)
            std::memcpy(timeline[t].row(i),
                        x_in.row(idx[i]) + static_cast<size_t>(t) * n,
                        static_cast<size_t>(n) * sizeof(double));
    }

    // acts[r][l]: layer inputs/outputs of step r (post-activation);
    // acts[r][0] is the assembled, possibly standardized input Z_r.
    std::vector<std::vector<Mat>> acts(static_cast<size_t>(n_R));

    for (int r = 0; r < n_R; ++r) {
        auto& a = acts[static_cast<size_t>(r)];
        a.resize(static_cast<size_t>(L) + 1);
        for (int l = 0; l <= L; ++l) a[l] = Mat(B, static_cast<size_t>(widths[l]));

        for (size_t i = 0; i < B; ++i)
            assemble_row(
                nv, n, n_M, [&](int j) { return timeline[n_M + r - j].row(i); },
                a[0].row(i));
        for (int l = 0; l < L; ++l) {
            for (size_t i = 0; i < B; ++i)
                layer_row(params.W[l], params.b[l], a[l].row(i), a[l + 1].row(i));
            if (l < L - 1)
                for (size_t i = 0; i < B; ++i)
                    relu_row(a[l + 1].row(i), a[l + 1].cols, &result.min_abs_preact);
        }

        Mat& next = timeline[static_cast<size_t>(n_M + 1 + r)];
        next = Mat(B, static_cast<size_t>(n));
        const Mat& prev = timeline[static_cast<size_t>(n_M + r)];
        for (size_t i = 0; i < B; ++i)
            for (int c = 0; c < n; ++c)
                next.at(i, c) = prev.at(i, c) + a[static_cast<size_t>(L)].at(i, c);
    }

    // Loss: per-sample accumulation first (step-major, component-minor),
    // then across samples in batch order, then one division.
    double total = 0.0;
    for (size_t i = 0; i < B; ++i) {
        double acc = 0.0;
        for (int r = 0; r < n_R; ++r)
            for (int c = 0; c < n; ++c) {
                const double d = timeline[n_M + 1 + r].at(i, c) -
                                 y_out.at(idx[i], static_cast<size_t>(r) * n + c);
                acc += d * d;
            }
        total += acc;
    }
    result.loss = total / static_cast<double>(B);

    // Backward.  bar_T[t] = dLoss/d timeline[t]; every prediction gets its
    // direct seed up front, later steps scatter history contributions into
    // earlier entries as we walk r downwards.
    std::vector<Mat> bar_T(timeline.size());
    for (size_t t = 0; t < bar_T.size(); ++t) bar_T[t] = Mat(B, static_cast<size_t>(n));
    const double seed_scale = 2.0 / static_cast<double>(B);
    for (int r = 0; r < n_R; ++r)
        for (size_t i = 0; i < B; ++i)
            for (int c = 0; c < n; ++c)
                bar_T[n_M + 1 + r].at(i, c) =
                    seed_scale * (timeline[n_M + 1 + r].at(i, c) -
                                  y_out.at(idx[i], static_cast<size_t>(r) * n + c));

    std::vector<Mat> bar(static_cast<size_t>(L) + 1);
    for (int r = n_R - 1; r >= 0; --r) {
        const auto& a = acts[static_cast<size_t>(r)];
        // Residual feed-through: the prediction is prev + f(z).
        for (size_t i = 0; i < B; ++i)
            axpy(1.0, bar_T[n_M + 1 + r].row(i), bar_T[n_M + r].row(i),
                 static_cast<size_t>(n));

        bar[static_cast<size_t>(L)] = bar_T[static_cast<size_t>(n_M + 1 + r)];
        for (int l = L - 1; l >= 0; --l) {
            Mat& bp = bar[l + 1];  // becomes dLoss/d pre-activation in place
            if (l < L - 1) {
                const Mat& post = a[l + 1];
                for (size_t i = 0; i < B; ++i)
                    for (size_t u = 0; u < bp.cols; ++u)
                        if (!(post.at(i, u) > 0.0)) bp.at(i, u) = 0.0;
            }
            Vec& gb = result.grad.b[l];
            for (size_t i = 0; i < B; ++i) axpy(1.0, bp.row(i), gb.data(), gb.size());
            Mat& gw = result.grad.W[l];
            for (size_t u = 0; u < gw.rows; ++u)
                for (size_t i = 0; i < B; ++i)
                    axpy(bp.at(i, u), a[l].row(i), gw.row(u), gw.cols);
            bar[l] = Mat(B, static_cast<size_t>(widths[l]));
            for (size_t i = 0; i < B; ++i)
                for (size_t u = 0; u < bp.cols; ++u)
                    axpy(bp.at(i, u), params.W[l].row(u), bar[l].row(i),
                         static_cast<size_t>(widths[l]));
        }

        // Scatter dLoss/dZ_r back onto the raw states it was assembled from.
        const Mat& bz = bar[0];
        for (size_t i = 0; i < B; ++i)
            for (int j = 0; j <= n_M; ++j) {
                double* dst = bar_T[static_cast<size_t>(n_M + r - j)].row(i);
                const double* src = bz.row(i) + static_cast<size_t>(j) * n;
                if (nv.on) {
                    for (int c = 0; c < n; ++c) dst[c] += src[c] * nv.inv[c];
                } else {
                    axpy(1.0, src, dst, static_cast<size_t>(n));
                }
            }
    }
    return result;
}

}  // namespace memflow
