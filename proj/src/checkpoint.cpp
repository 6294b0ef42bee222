#include "memflow/checkpoint.hpp"

#include <cmath>

#include <json.hpp>

#include "memflow/errors.hpp"
#include "memflow/io_util.hpp"
#include "memflow/version.hpp"

namespace memflow {

using nlohmann::json;

namespace {

constexpr const char* kCheckpointMagic = "MFC1";

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Relu:
            return "relu";
    }
    throw ContractViolation("checkpoint: unknown activation");
}

Activation parse_activation(const std::string& name, const std::filesystem::path& path) {
    if (name == "relu") return Activation::Relu;
    throw FormatError(
        msgf("'%s': unknown activation '%s'", path.string().c_str(), name.c_str()));
}

void write_params(AtomicFileWriter& w, const NetworkParams& p) {
    for (const Mat& m : p.W) w.write_doubles(m.a.data(), m.a.size());
    for (const Vec& v : p.b) w.write_doubles(v.data(), v.size());
}

void read_params(FileReader& r, NetworkParams& p) {
    for (Mat& m : p.W) r.read_doubles(m.a.data(), m.a.size());
    for (Vec& v : p.b) r.read_doubles(v.data(), v.size());
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    ckpt.config.validate();
    check_params(ckpt.config, ckpt.params);
    ckpt.norm.validate(ckpt.config.n);
    if (ckpt.has_opt_state)
        require(ckpt.params.same_shape(ckpt.opt.m) && ckpt.params.same_shape(ckpt.opt.v),
                "save_checkpoint: optimizer moment shapes do not match the parameters");

    json h;
    h["config"] = {{"activation", activation_name(ckpt.config.activation)},
                   {"dt", ckpt.config.dt},
                   {"hidden_widths", ckpt.config.hidden_widths},
                   {"n", ckpt.config.n},
                   {"n_mem", ckpt.config.n_M},
                   {"n_rec", ckpt.config.n_R}};
    json layers = json::array();
    for (const Mat& w : ckpt.params.W)
        layers.push_back(json::array({w.rows, w.cols}));
    h["layers"] = layers;
    h["epoch"] = ckpt.epoch;
    h["train_loss"] = ckpt.train_loss;
    h["seed"] = ckpt.seed;
    h["has_norm"] = ckpt.norm.enabled();
    h["has_opt_state"] = ckpt.has_opt_state;
    if (ckpt.has_opt_state)
        h["opt"] = {{"beta1_pow", ckpt.opt.beta1_pow},
                    {"beta2_pow", ckpt.opt.beta2_pow},
                    {"t", ckpt.opt.t}};
    h["tool"] = kToolVersion;

    AtomicFileWriter w(path);
    w.write_text(std::string(kCheckpointMagic) + "\n");
    w.write_text(h.dump() + "\n");
    write_params(w, ckpt.params);
    if (ckpt.norm.enabled()) {
        w.write_doubles(ckpt.norm.mean.data(), ckpt.norm.mean.size());
        w.write_doubles(ckpt.norm.stdev.data(), ckpt.norm.stdev.size());
    }
    if (ckpt.has_opt_state) {
        write_params(w, ckpt.opt.m);
        write_params(w, ckpt.opt.v);
    }
    w.commit();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    FileReader r(path);
    const std::string magic = r.read_line();
    if (magic != kCheckpointMagic)
        throw FormatError(msgf("'%s': bad magic '%s' (expected %s)",
                               path.string().c_str(), magic.c_str(), kCheckpointMagic));
    json h = json::parse(r.read_line(), nullptr, /*allow_exceptions=*/false);
    if (h.is_discarded() || !h.is_object())
        throw FormatError(msgf("'%s': malformed header line", path.string().c_str()));
    for (const char* key :
         {"config", "layers", "epoch", "train_loss", "seed", "has_norm", "has_opt_state"})
        if (!h.contains(key))
            throw FormatError(
                msgf("'%s': header missing field '%s'", path.string().c_str(), key));
    const json& c = h.at("config");
    for (const char* key : {"activation", "dt", "hidden_widths", "n", "n_mem", "n_rec"})
        if (!c.contains(key))
            throw FormatError(
                msgf("'%s': config echo missing field '%s'", path.string().c_str(), key));

    Checkpoint ckpt;
    ckpt.config.n = c.at("n").get<int>();
    ckpt.config.n_M = c.at("n_mem").get<int>();
    ckpt.config.n_R = c.at("n_rec").get<int>();
    ckpt.config.dt = c.at("dt").get<double>();
    ckpt.config.hidden_widths = c.at("hidden_widths").get<std::vector<int>>();
    ckpt.config.activation = parse_activation(c.at("activation").get<std::string>(), path);
    try {
        ckpt.config.validate();
    } catch (const ContractViolation& e) {
        throw IntegrityError(msgf("'%s': %s", path.string().c_str(), e.what()));
    }

    ckpt.params = make_params(ckpt.config);
    const json& layers = h.at("layers");
    if (!layers.is_array() || layers.size() != ckpt.params.W.size())
        throw IntegrityError(
            msgf("'%s': layer shape list does not match the config", path.string().c_str()));
    for (size_t l = 0; l < ckpt.params.W.size(); ++l) {
        const json& s = layers.at(l);
        if (!s.is_array() || s.size() != 2 ||
            s.at(0).get<size_t>() != ckpt.params.W[l].rows ||
            s.at(1).get<size_t>() != ckpt.params.W[l].cols)
            throw IntegrityError(msgf("'%s': layer %zu shape does not match the config",
                                      path.string().c_str(), l));
    }

    ckpt.epoch = h.at("epoch").get<uint64_t>();
    ckpt.train_loss = h.at("train_loss").get<double>();
    ckpt.seed = h.at("seed").get<uint64_t>();
    ckpt.has_opt_state = h.at("has_opt_state").get<bool>();
    const bool has_norm = h.at("has_norm").get<bool>();

    read_params(r, ckpt.params);
    if (has_norm) {
        ckpt.norm.mean.resize(static_cast<size_t>(ckpt.config.n));
        ckpt.norm.stdev.resize(static_cast<size_t>(ckpt.config.n));
        r.read_doubles(ckpt.norm.mean.data(), ckpt.norm.mean.size());
        r.read_doubles(ckpt.norm.stdev.data(), ckpt.norm.stdev.size());
    }
    if (ckpt.has_opt_state) {
        if (!h.contains("opt"))
            throw FormatError(msgf("'%s': has_opt_state set but optimizer counters missing",
                                   path.string().c_str()));
        const json& opt = h.at("opt");
        ckpt.opt.t = opt.at("t").get<uint64_t>();
        ckpt.opt.beta1_pow = opt.at("beta1_pow").get<double>();
        ckpt.opt.beta2_pow = opt.at("beta2_pow").get<double>();
        ckpt.opt.m = make_params(ckpt.config);
        ckpt.opt.v = make_params(ckpt.config);
        read_params(r, ckpt.opt.m);
        read_params(r, ckpt.opt.v);
    }
    r.expect_eof();

    for (const Mat& w : ckpt.params.W)
        for (double v : w.a)
            if (!std::isfinite(v))
                throw IntegrityError(
                    msgf("'%s': non-finite weight in payload", path.string().c_str()));
    for (const Vec& b : ckpt.params.b)
        for (double v : b)
            if (!std::isfinite(v))
                throw IntegrityError(
                    msgf("'%s': non-finite bias in payload", path.string().c_str()));
    return ckpt;
}

Model to_model(const Checkpoint& ckpt) {
    return Model{ckpt.config, ckpt.params, ckpt.norm};
}

}  // namespace memflow
