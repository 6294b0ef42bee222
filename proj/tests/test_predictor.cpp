#include <doctest.h>

#include <cmath>
#include <limits>

#include "memflow/predictor.hpp"
#include "memflow/rng.hpp"
#include "support.hpp"

using namespace memflow;

namespace {

Model zero_model(int n, int n_M, double dt) {
    Model m;
    m.config.n = n;
    m.config.n_M = n_M;
    m.config.n_R = 1;
    m.config.dt = dt;
    m.config.hidden_widths = {};
    m.params = make_params(m.config);
    return m;
}

Mat warmup_from(const std::vector<double>& flat, int n) {
    Mat w(flat.size() / static_cast<size_t>(n), static_cast<size_t>(n));
    w.a = flat;
    return w;
}

}  // namespace

TEST_CASE("zero parameters hold the last state forever") {
    const Model m = zero_model(2, 1, 0.1);
    const Mat warmup = warmup_from({1.0, -2.0, 3.0, 0.5}, 2);
    const PredictionRun run = predict(m, warmup, 5);
    CHECK(run.valid_steps() == 5);
    CHECK_FALSE(run.truncated);
    CHECK(run.dt == 0.1);
    CHECK(run.requested_steps == 5);
    for (size_t r = 0; r < 5; ++r) {
        CHECK(run.predicted.at(r, 0) == 3.0);
        CHECK(run.predicted.at(r, 1) == 0.5);
    }
    // Times continue the warmup grid.
    CHECK(run.time_of(0) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("one step equals forward_block bitwise") {
    Model m;
    m.config.n = 2;
    m.config.n_M = 2;
    m.config.n_R = 1;
    m.config.dt = 0.05;
    m.config.hidden_widths = {7, 4};
    m.params = init_params(m.config, 12);

    RngStream s(3);
    Mat warmup(3, 2);
    for (double& v : warmup.a) v = s.uniform(-1.0, 1.0);

    const PredictionRun run = predict(m, warmup, 1);
    double direct[2];
    forward_block(m.config, m.params, m.norm, warmup.a.data(), direct);
    REQUIRE(run.valid_steps() == 1);
    CHECK(run.predicted.at(0, 0) == direct[0]);
    CHECK(run.predicted.at(0, 1) == direct[1]);
}

TEST_CASE("rollout matches recurrent_forward row for row") {
    Model m;
    m.config.n = 1;
    m.config.n_M = 3;
    m.config.n_R = 1;
    m.config.dt = 0.02;
    m.config.hidden_widths = {5};
    m.params = init_params(m.config, 8);
    m.norm.mean = {0.1};
    m.norm.stdev = {0.8};

    const Vec history{0.3, 0.1, -0.2, 0.25};
    const Mat warmup = warmup_from(history, 1);
    const PredictionRun run = predict(m, warmup, 6);
    const Mat rolled = recurrent_forward(m.config, m.params, m.norm, history, 6);
    REQUIRE(run.valid_steps() == 6);
    for (size_t r = 0; r < 6; ++r) CHECK(run.predicted.at(r, 0) == rolled.at(r, 0));
}

TEST_CASE("a geometric blow-up truncates at the guard") {
    // f(z) = 9 z: x_{k+1} = 10 x_k from 1, so row m holds 10^(m+1).
    // 1e6 sits exactly on the guard (still valid); 1e7 is beyond it.
    Model m = zero_model(1, 0, 0.1);
    m.params.W[0].at(0, 0) = 9.0;
    const Mat warmup = warmup_from({1.0}, 1);
    const PredictionRun run = predict(m, warmup, 30);
    CHECK(run.truncated);
    CHECK(run.requested_steps == 30);
    REQUIRE(run.valid_steps() == 6);
    CHECK(run.predicted.at(0, 0) == 10.0);
    CHECK(run.predicted.at(5, 0) == 1e6);
}

TEST_CASE("a non-finite step truncates instead of throwing") {
    Model m = zero_model(1, 0, 0.1);
    m.params.W[0].at(0, 0) = 1e308;  // the very first step overflows to inf
    const Mat warmup = warmup_from({10.0}, 1);
    const PredictionRun run = predict(m, warmup, 3);
    CHECK(run.truncated);
    CHECK(run.valid_steps() == 0);
    CHECK(run.predicted.rows == 0);
}

TEST_CASE("warmup states sitting beyond the guard are rejected up front") {
    const Model m = zero_model(1, 1, 0.1);
    const Mat bad = warmup_from({1e8, 0.0}, 1);
    CHECK_THROWS_AS(predict(m, bad, 3), ContractViolation);
}

TEST_CASE("warmup validation") {
    const Model m = zero_model(2, 1, 0.1);
    CHECK_THROWS_AS(predict(m, Mat(1, 2), 3), ContractViolation);  // needs n_M+1 rows
    CHECK_THROWS_AS(predict(m, Mat(2, 3), 3), ContractViolation);  // wrong width
    CHECK_THROWS_AS(predict(m, Mat(2, 2), 0), ContractViolation);  // zero steps
    Mat bad(2, 2);
    bad.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(predict(m, bad, 1), ContractViolation);
}

TEST_CASE("make_warmup reproduces the reference integration rows") {
    const SystemSpec spec = make_system(SystemId::Pendulum);
    const std::vector<double> x0{0.3, 0.1};
    const std::vector<double> alpha{0.1, 9.0};
    const int n_M = 4;
    const Mat w = make_warmup(spec, x0, alpha, n_M, 0.02, 4);
    REQUIRE(w.rows == 5);
    REQUIRE(w.cols == 2);

    const Trajectory ref = integrate(spec, x0, alpha, 0.02, 5, 4, false);
    for (size_t r = 0; r < 5; ++r)
        for (int c = 0; c < 2; ++c) CHECK(w.at(r, static_cast<size_t>(c)) == ref.row(r)[c]);
}

TEST_CASE("attach_reference aligns truth with the predicted rows") {
    const Model m = zero_model(1, 1, 0.1);
    const Mat warmup = warmup_from({5.0, 5.0}, 1);
    PredictionRun run = predict(m, warmup, 3);
    REQUIRE(run.valid_steps() == 3);

    const Trajectory ref = testsupport::line_trajectory(1, 6, 0.1, 100.0, 1.0);
    attach_reference(run, ref);
    REQUIRE(run.reference.has_value());
    REQUIRE(run.reference->rows == 3);
    // Rows n_M+1 .. n_M+3 of the trajectory, i.e. indices 2, 3, 4.
    CHECK(run.reference->at(0, 0) == ref.row(2)[0]);
    CHECK(run.reference->at(1, 0) == ref.row(3)[0]);
    CHECK(run.reference->at(2, 0) == ref.row(4)[0]);

    // Too short to cover the predicted rows: indices 2..4 need 5 rows.
    PredictionRun other = predict(m, warmup, 3);
    const Trajectory tiny = testsupport::line_trajectory(1, 4, 0.1, 0.0, 1.0);
    CHECK_THROWS_AS(attach_reference(other, tiny), ContractViolation);

    // Dimension mismatch.
    PredictionRun third = predict(m, warmup, 3);
    const Trajectory wide = testsupport::line_trajectory(2, 8, 0.1, 0.0, 1.0);
    CHECK_THROWS_AS(attach_reference(third, wide), ContractViolation);
}

TEST_CASE("different hidden parameters yield different rollouts") {
    const SystemSpec spec = make_system(SystemId::Pendulum);
    const std::vector<double> x0{0.3, 0.1};
    const Mat a = make_warmup(spec, x0, {0.05, 9.0}, 3, 0.02, 4);
    const Mat b = make_warmup(spec, x0, {0.15, 9.0}, 3, 0.02, 4);
    CHECK(a.a != b.a);
    CHECK(a.at(0, 0) == b.at(0, 0));  // same initial row
}
