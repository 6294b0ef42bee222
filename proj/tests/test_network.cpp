#include <doctest.h>

#include <cmath>
#include <limits>

#include "memflow/network.hpp"
#include "memflow/rng.hpp"
#include "support.hpp"

using namespace memflow;

namespace {

ModelConfig scalar_config(int n_M, int n_R, std::vector<int> hidden) {
    ModelConfig c;
    c.n = 1;
    c.n_M = n_M;
    c.n_R = n_R;
    c.dt = 0.02;
    c.hidden_widths = std::move(hidden);
    return c;
}

}  // namespace

TEST_CASE("parameter shapes follow the layer widths") {
    ModelConfig c;
    c.n = 2;
    c.n_M = 3;
    c.n_R = 1;
    c.dt = 0.02;
    c.hidden_widths = {5, 7};
    CHECK(c.input_dim() == 8);
    CHECK(c.output_dim() == 2);
    CHECK(c.layer_widths() == std::vector<int>{8, 5, 7, 2});

    const NetworkParams p = make_params(c);
    REQUIRE(p.W.size() == 3);
    REQUIRE(p.b.size() == 3);
    CHECK(p.W[0].rows == 5);
    CHECK(p.W[0].cols == 8);
    CHECK(p.W[1].rows == 7);
    CHECK(p.W[1].cols == 5);
    CHECK(p.W[2].rows == 2);
    CHECK(p.W[2].cols == 7);
    CHECK(p.b[2].size() == 2);
    CHECK(p.scalar_count() == 5 * 8 + 5 + 7 * 5 + 7 + 2 * 7 + 2);
    for (const Mat& w : p.W)
        for (double v : w.a) CHECK(v == 0.0);
    check_params(c, p);  // must not throw
}

TEST_CASE("check_params rejects mismatched shapes") {
    ModelConfig c = scalar_config(1, 1, {4});
    NetworkParams p = make_params(c);
    p.W[0] = Mat(4, 3);  // wrong fan-in
    CHECK_THROWS_AS(check_params(c, p), ContractViolation);
    NetworkParams q = make_params(c);
    q.b.pop_back();
    CHECK_THROWS_AS(check_params(c, q), ContractViolation);
}

TEST_CASE("model config validation") {
    ModelConfig c = scalar_config(0, 1, {});
    CHECK_NOTHROW(c.validate());
    ModelConfig bad = c;
    bad.n = 0;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = c;
    bad.n_M = -1;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = c;
    bad.n_R = 0;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = c;
    bad.dt = 0.0;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = c;
    bad.hidden_widths = {4, 0};
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("initialization is seeded, zero-biased, and He-scaled") {
    ModelConfig c;
    c.n = 10;
    c.n_M = 9;
    c.n_R = 1;
    c.dt = 0.02;
    c.hidden_widths = {200};
    const NetworkParams a = init_params(c, 31);
    const NetworkParams b = init_params(c, 31);
    const NetworkParams d = init_params(c, 32);
    CHECK(a == b);
    CHECK(a.W[0].a != d.W[0].a);
    for (const Vec& bias : a.b)
        for (double v : bias) CHECK(v == 0.0);

    // First weights replay the draw order exactly: layer by layer, row major.
    RngStream stream(31);
    const double s0 = std::sqrt(2.0 / 100.0);
    for (size_t i = 0; i < 8; ++i) CHECK(a.W[0].a[i] == s0 * stream.normal());

    // He scaling: the first layer holds 200*100 draws of Normal(0, 2/100).
    double mean = 0.0;
    for (double v : a.W[0].a) mean += v;
    mean /= static_cast<double>(a.W[0].size());
    double var = 0.0;
    for (double v : a.W[0].a) var += (v - mean) * (v - mean);
    var /= static_cast<double>(a.W[0].size());
    CHECK(std::fabs(mean) < 0.005);
    CHECK(var == doctest::Approx(0.02).epsilon(0.05));
}

TEST_CASE("single affine map with no hidden layers") {
    const ModelConfig c = scalar_config(0, 1, {});
    NetworkParams p = make_params(c);
    p.W[0].at(0, 0) = 2.0;
    p.b[0][0] = 0.5;
    const double history[1] = {3.0};
    double x_next = 0.0;
    forward_block(c, p, Normalization{}, history, &x_next);
    CHECK(x_next == 9.5);  // 3 + (2*3 + 0.5)
}

TEST_CASE("relu gates negative pre-activations to zero") {
    const ModelConfig c = scalar_config(0, 1, {1});
    NetworkParams p = make_params(c);
    p.W[0].at(0, 0) = 1.0;
    p.b[0][0] = -2.0;
    p.W[1].at(0, 0) = 3.0;

    double x_next = 0.0;
    double x = 1.0;  // pre-activation -1 -> gated
    forward_block(c, p, Normalization{}, &x, &x_next);
    CHECK(x_next == 1.0);
    x = 5.0;  // pre-activation 3 -> passes, f = 9
    forward_block(c, p, Normalization{}, &x, &x_next);
    CHECK(x_next == 14.0);
}

TEST_CASE("history blocks are assembled newest first") {
    const ModelConfig c = scalar_config(1, 1, {});
    const double history[2] = {5.0, 2.0};  // oldest first: x_{k-1}=5, x_k=2

    NetworkParams pick_newest = make_params(c);
    pick_newest.W[0].at(0, 0) = 1.0;  // reads z[0]
    double x_next = 0.0;
    forward_block(c, pick_newest, Normalization{}, history, &x_next);
    CHECK(x_next == 4.0);  // 2 + 2: z[0] is the newest state

    NetworkParams pick_oldest = make_params(c);
    pick_oldest.W[0].at(0, 1) = 1.0;  // reads z[1]
    forward_block(c, pick_oldest, Normalization{}, history, &x_next);
    CHECK(x_next == 7.0);  // 2 + 5: z[1] is one step older
}

TEST_CASE("standardization is applied per state block, residual stays raw") {
    const ModelConfig c = scalar_config(1, 1, {});
    NetworkParams p = make_params(c);
    p.W[0].at(0, 0) = 1.0;
    p.W[0].at(0, 1) = 1.0;
    Normalization norm;
    norm.mean = {2.0};
    norm.stdev = {4.0};
    const double history[2] = {2.0, 6.0};  // standardized blocks: newest 1.0, oldest 0.0
    double x_next = 0.0;
    forward_block(c, p, norm, history, &x_next);
    CHECK(x_next == 7.0);  // 6 + (1.0 + 0.0): the step adds to the raw state
}

TEST_CASE("normalization validation") {
    Normalization norm;
    norm.mean = {1.0, 2.0};
    norm.stdev = {1.0};
    CHECK_THROWS_AS(norm.validate(2), ContractViolation);
    norm.stdev = {1.0, -1.0};
    CHECK_THROWS_AS(norm.validate(2), ContractViolation);
    norm.stdev = {1.0, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(norm.validate(2), ContractViolation);
    norm.stdev = {1.0, 0.5};
    CHECK_NOTHROW(norm.validate(2));
    CHECK_THROWS_AS(norm.validate(3), ContractViolation);
    const Normalization off;
    CHECK_NOTHROW(off.validate(5));
}

TEST_CASE("recurrent_forward feeds predictions back in") {
    const ModelConfig c = scalar_config(0, 1, {});
    NetworkParams p = make_params(c);
    p.W[0].at(0, 0) = 0.5;  // x_{k+1} = 1.5 x_k
    const Mat out = recurrent_forward(c, p, Normalization{}, Vec{1.0}, 3);
    REQUIRE(out.rows == 3);
    REQUIRE(out.cols == 1);
    CHECK(out.at(0, 0) == 1.5);
    CHECK(out.at(1, 0) == 2.25);
    CHECK(out.at(2, 0) == 3.375);
}

TEST_CASE("one recurrent step equals forward_block bit for bit") {
    ModelConfig c;
    c.n = 3;
    c.n_M = 2;
    c.n_R = 1;
    c.dt = 0.02;
    c.hidden_widths = {6, 4};
    const NetworkParams p = init_params(c, 5);
    RngStream s(77);
    Vec history(9);
    for (double& v : history) v = s.uniform(-1.0, 1.0);

    const Mat out = recurrent_forward(c, p, Normalization{}, history, 1);
    double direct[3];
    forward_block(c, p, Normalization{}, history.data(), direct);
    for (int j = 0; j < 3; ++j) CHECK(out.at(0, static_cast<size_t>(j)) == direct[j]);
}

TEST_CASE("unrolled loss shifts the history window") {
    // x_{k+1} = x_k + 0.5 z0 + 0.25 z1 with z assembled newest first.
    const ModelConfig c = scalar_config(1, 2, {});
    NetworkParams p = make_params(c);
    p.W[0].at(0, 0) = 0.5;
    p.W[0].at(0, 1) = 0.25;

    Mat x_in(1, 2), y_out(1, 2);
    x_in.at(0, 0) = 1.0;  // oldest
    x_in.at(0, 1) = 2.0;  // newest
    y_out.at(0, 0) = 3.0;
    y_out.at(0, 1) = 5.0;
    // step 1: f = 0.5*2 + 0.25*1 = 1.25 -> x1 = 3.25, residual 0.25
    // step 2: f = 0.5*3.25 + 0.25*2 = 2.125 -> x2 = 5.375, residual 0.375
    const double expected = 0.25 * 0.25 + 0.375 * 0.375;
    CHECK(batch_loss(c, p, Normalization{}, x_in, y_out) == expected);

    const Mat rolled = recurrent_forward(c, p, Normalization{}, Vec{1.0, 2.0}, 2);
    CHECK(rolled.at(0, 0) == 3.25);
    CHECK(rolled.at(1, 0) == 5.375);
}

TEST_CASE("batch loss decomposes exactly over samples") {
    ModelConfig c;
    c.n = 2;
    c.n_M = 1;
    c.n_R = 3;
    c.dt = 0.02;
    c.hidden_widths = {7};
    const NetworkParams p = init_params(c, 11);
    RngStream s(13);
    Mat x_in(2, 4), y_out(2, 6);
    for (double& v : x_in.a) v = s.uniform(-1.0, 1.0);
    for (double& v : y_out.a) v = s.uniform(-1.0, 1.0);

    const double both = batch_loss(c, p, Normalization{}, x_in, y_out);
    const size_t i0 = 0, i1 = 1;
    const double first = batch_loss(c, p, Normalization{}, x_in, y_out, &i0, 1);
    const double second = batch_loss(c, p, Normalization{}, x_in, y_out, &i1, 1);
    CHECK(both == (first + second) / 2.0);

    const size_t all[2] = {0, 1};
    CHECK(batch_loss(c, p, Normalization{}, x_in, y_out, all, 2) == both);
}

TEST_CASE("grad_loss reports the identical loss value") {
    ModelConfig c;
    c.n = 2;
    c.n_M = 2;
    c.n_R = 2;
    c.dt = 0.02;
    c.hidden_widths = {5, 5};
    const NetworkParams p = init_params(c, 21);
    RngStream s(22);
    Mat x_in(4, 6), y_out(4, 4);
    for (double& v : x_in.a) v = s.uniform(-1.0, 1.0);
    for (double& v : y_out.a) v = s.uniform(-1.0, 1.0);
    const size_t idx[4] = {0, 1, 2, 3};

    SUBCASE("without normalization") {
        const LossGrad lg = grad_loss(c, p, Normalization{}, x_in, y_out, idx, 4);
        CHECK(lg.loss == batch_loss(c, p, Normalization{}, x_in, y_out));
        CHECK(lg.grad.same_shape(p));
        CHECK(lg.min_abs_preact > 0.0);
        CHECK(std::isfinite(lg.min_abs_preact));
    }
    SUBCASE("with normalization") {
        const Normalization norm = fit_normalization(x_in, c.n);
        const LossGrad lg = grad_loss(c, p, norm, x_in, y_out, idx, 4);
        CHECK(lg.loss == batch_loss(c, p, norm, x_in, y_out));
    }
}

TEST_CASE("zero residual gives an exactly zero gradient") {
    // With zero parameters the model predicts x_{k+1} = x_k; matching
    // targets make every residual zero, so the gradient must vanish
    // exactly (no rounding dust).
    const ModelConfig c = scalar_config(1, 2, {3});
    const NetworkParams p = make_params(c);  // all zero
    Mat x_in(1, 2), y_out(1, 2);
    x_in.at(0, 0) = 4.0;
    x_in.at(0, 1) = 4.0;
    y_out.at(0, 0) = 4.0;
    y_out.at(0, 1) = 4.0;
    const size_t i0 = 0;
    const LossGrad lg = grad_loss(c, p, Normalization{}, x_in, y_out, &i0, 1);
    CHECK(lg.loss == 0.0);
    for (const Mat& w : lg.grad.W)
        for (double v : w.a) CHECK(v == 0.0);
    for (const Vec& bv : lg.grad.b)
        for (double v : bv) CHECK(v == 0.0);
}

TEST_CASE("min_abs_preact is +inf for a purely affine model") {
    const ModelConfig c = scalar_config(0, 1, {});
    const NetworkParams p = make_params(c);
    Mat x_in(1, 1), y_out(1, 1);
    x_in.at(0, 0) = 1.0;
    y_out.at(0, 0) = 2.0;
    const size_t i0 = 0;
    const LossGrad lg = grad_loss(c, p, Normalization{}, x_in, y_out, &i0, 1);
    CHECK(lg.min_abs_preact == std::numeric_limits<double>::infinity());
}

TEST_CASE("fit_normalization pools every state block") {
    Mat x_in(2, 2);  // n = 1, n_M = 1: two blocks per row
    x_in.at(0, 0) = 0.0;
    x_in.at(0, 1) = 2.0;
    x_in.at(1, 0) = 4.0;
    x_in.at(1, 1) = 6.0;
    const Normalization norm = fit_normalization(x_in, 1);
    REQUIRE(norm.mean.size() == 1);
    CHECK(norm.mean[0] == 3.0);
    CHECK(norm.stdev[0] == std::sqrt(5.0));  // population variance of {0,2,4,6}

    const size_t head = 0;
    const Normalization sub = fit_normalization(x_in, 1, &head, 1);
    CHECK(sub.mean[0] == 1.0);
    CHECK(sub.stdev[0] == 1.0);
}

TEST_CASE("fit_normalization handles multi-component states") {
    Mat x_in(1, 4);  // n = 2, one row with two blocks
    x_in.at(0, 0) = 1.0;
    x_in.at(0, 1) = 10.0;
    x_in.at(0, 2) = 3.0;
    x_in.at(0, 3) = 30.0;
    const Normalization norm = fit_normalization(x_in, 2);
    CHECK(norm.mean[0] == 2.0);
    CHECK(norm.mean[1] == 20.0);
    CHECK(norm.stdev[0] == 1.0);
    CHECK(norm.stdev[1] == 10.0);
}

TEST_CASE("batch_loss input validation") {
    const ModelConfig c = scalar_config(1, 1, {});
    const NetworkParams p = make_params(c);
    Mat bad_x(1, 3), y(1, 1);
    CHECK_THROWS_AS(batch_loss(c, p, Normalization{}, bad_x, y), ContractViolation);
    Mat x(1, 2), bad_y(2, 1);
    CHECK_THROWS_AS(batch_loss(c, p, Normalization{}, x, bad_y), ContractViolation);
}
