#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "memflow/checkpoint.hpp"
#include "memflow/rng.hpp"
#include "support.hpp"

using namespace memflow;
using testsupport::TmpDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

Checkpoint full_checkpoint() {
    Checkpoint c;
    c.config.n = 2;
    c.config.n_M = 3;
    c.config.n_R = 4;
    c.config.dt = 0.02;
    c.config.hidden_widths = {6, 5};
    c.params = init_params(c.config, 17);
    c.norm.mean = {0.25, -1.5};
    c.norm.stdev = {2.0, 0.5};
    c.has_opt_state = true;
    c.opt = make_adam_state(c.config);
    c.opt.t = 123;
    c.opt.beta1_pow = 0.531;
    c.opt.beta2_pow = 0.885;
    RngStream s(91);
    for (Mat& w : c.opt.m.W)
        for (double& v : w.a) v = s.uniform(-1.0, 1.0);
    for (Vec& b : c.opt.v.b)
        for (double& v : b) v = s.uniform(0.0, 1.0);
    c.epoch = 57;
    c.train_loss = 3.25e-4;
    c.seed = 99;
    return c;
}

Checkpoint minimal_checkpoint() {
    Checkpoint c;
    c.config.n = 1;
    c.config.n_M = 0;
    c.config.n_R = 1;
    c.config.dt = 0.1;
    c.config.hidden_widths = {};
    c.params = make_params(c.config);
    c.params.W[0].at(0, 0) = -0.75;
    c.params.b[0][0] = 0.125;
    c.epoch = 1;
    c.train_loss = 0.5;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_CASE("checkpoint with optimizer state round-trips bit-exactly") {
    TmpDir tmp;
    const Checkpoint c = full_checkpoint();
    const auto path = tmp.path / "full.mfc";
    save_checkpoint(path, c);
    const Checkpoint r = load_checkpoint(path);

    CHECK(r.config.n == c.config.n);
    CHECK(r.config.n_M == c.config.n_M);
    CHECK(r.config.n_R == c.config.n_R);
    CHECK(r.config.dt == c.config.dt);
    CHECK(r.config.hidden_widths == c.config.hidden_widths);
    CHECK(r.config.activation == c.config.activation);
    CHECK(r.params == c.params);
    CHECK(r.norm.mean == c.norm.mean);
    CHECK(r.norm.stdev == c.norm.stdev);
    REQUIRE(r.has_opt_state);
    CHECK(r.opt.t == c.opt.t);
    CHECK(r.opt.beta1_pow == c.opt.beta1_pow);
    CHECK(r.opt.beta2_pow == c.opt.beta2_pow);
    CHECK(r.opt.m == c.opt.m);
    CHECK(r.opt.v == c.opt.v);
    CHECK(r.epoch == c.epoch);
    CHECK(r.train_loss == c.train_loss);
    CHECK(r.seed == c.seed);
}

TEST_CASE("minimal checkpoint round-trips") {
    TmpDir tmp;
    const Checkpoint c = minimal_checkpoint();
    const auto path = tmp.path / "min.mfc";
    save_checkpoint(path, c);
    const Checkpoint r = load_checkpoint(path);
    CHECK(r.params == c.params);
    CHECK_FALSE(r.norm.enabled());
    CHECK_FALSE(r.has_opt_state);
    CHECK(r.train_loss == c.train_loss);
}

TEST_CASE("saving twice yields byte-identical files") {
    TmpDir tmp;
    const Checkpoint c = full_checkpoint();
    save_checkpoint(tmp.path / "a.mfc", c);
    save_checkpoint(tmp.path / "b.mfc", c);
    CHECK(slurp(tmp.path / "a.mfc") == slurp(tmp.path / "b.mfc"));
    // And a load-save cycle reproduces the bytes too.
    const Checkpoint r = load_checkpoint(tmp.path / "a.mfc");
    save_checkpoint(tmp.path / "c.mfc", r);
    CHECK(slurp(tmp.path / "a.mfc") == slurp(tmp.path / "c.mfc"));
}

TEST_CASE("checkpoint loader error taxonomy") {
    TmpDir tmp;
    const auto path = tmp.path / "x.mfc";

    SUBCASE("bad magic is a format error") {
        save_checkpoint(path, minimal_checkpoint());
        std::string bytes = slurp(path);
        bytes[0] = 'Z';
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << bytes;
        out.close();
        CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    }
    SUBCASE("garbage header is a format error") {
        std::ofstream out(path, std::ios::binary);
        out << "MFC1\nnot json\n";
        out.close();
        CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    }
    SUBCASE("truncated payload is an integrity error") {
        save_checkpoint(path, full_checkpoint());
        std::string bytes = slurp(path);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<long>(bytes.size() - 16));
        out.close();
        CHECK_THROWS_AS(load_checkpoint(path), IntegrityError);
    }
    SUBCASE("trailing bytes are an integrity error") {
        save_checkpoint(path, minimal_checkpoint());
        std::ofstream app(path, std::ios::binary | std::ios::app);
        const double junk = 0.0;
        app.write(reinterpret_cast<const char*>(&junk), sizeof junk);
        app.close();
        CHECK_THROWS_AS(load_checkpoint(path), IntegrityError);
    }
    SUBCASE("non-finite weights are an integrity error") {
        Checkpoint c = minimal_checkpoint();
        c.params.W[0].at(0, 0) = std::numeric_limits<double>::quiet_NaN();
        save_checkpoint(path, c);
        CHECK_THROWS_AS(load_checkpoint(path), IntegrityError);
    }
    SUBCASE("missing file is an io error") {
        CHECK_THROWS_AS(load_checkpoint(tmp.path / "absent.mfc"), IoError);
    }
}

TEST_CASE("to_model yields a runnable model") {
    const Checkpoint c = full_checkpoint();
    const Model m = to_model(c);
    CHECK(m.config.n == 2);
    CHECK(m.params == c.params);
    CHECK(m.norm.enabled());

    Vec history(static_cast<size_t>(m.config.input_dim()), 0.1);
    const Mat out = recurrent_forward(m.config, m.params, m.norm, history, 2);
    CHECK(out.rows == 2);
    for (double v : out.a) CHECK(std::isfinite(v));
}

TEST_CASE("save_checkpoint validates shape agreement") {
    TmpDir tmp;
    Checkpoint c = minimal_checkpoint();
    c.params.W[0] = Mat(2, 2);
    CHECK_THROWS_AS(save_checkpoint(tmp.path / "bad.mfc", c), ContractViolation);

    Checkpoint d = minimal_checkpoint();
    d.has_opt_state = true;  // opt moments left unshaped
    CHECK_THROWS_AS(save_checkpoint(tmp.path / "bad2.mfc", d), ContractViolation);
}
