#include "memflow/trajectory_io.hpp"

#include <cmath>

#include <json.hpp>

#include "memflow/io_util.hpp"
#include "memflow/thread_pool.hpp"
#include "memflow/version.hpp"

namespace memflow {

using nlohmann::json;

namespace {

constexpr const char* kTrajMagic = "MFT1";
constexpr const char* kIndexFormat = "MFT1-collection";

json parse_manifest_line(const FileReader& reader, const std::string& line) {
    json m = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (m.is_discarded() || !m.is_object())
        throw FormatError(msgf("'%s': malformed manifest line",
                               reader.path().string().c_str()));
    return m;
}

std::string trajectory_file_name(size_t index) {
    return msgf("traj_%06zu.mft", index);
}

}  // namespace

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj,
                     const std::string& system, bool debug) {
    require(traj.K >= 1 && traj.n >= 1, "save_trajectory: empty trajectory");
    require(traj.states.size() == traj.K * static_cast<size_t>(traj.n),
            "save_trajectory: state buffer does not match K*n");
    require(!debug || traj.debug_params.has_value(),
            "save_trajectory: debug flag set but no parameters recorded");

    json m;
    m["K"] = traj.K;
    m["debug"] = debug;
    m["dt"] = traj.dt;
    m["n"] = traj.n;
    m["system"] = system;
    m["tool"] = kToolVersion;
    if (debug) m["debug_params"] = *traj.debug_params;

    AtomicFileWriter w(path);
    w.write_text(std::string(kTrajMagic) + "\n");
    w.write_text(m.dump() + "\n");
    w.write_doubles(traj.states.data(), traj.states.size());
    w.commit();
}

Trajectory load_trajectory(const std::filesystem::path& path, TrajectoryMeta* meta) {
    FileReader r(path);
    std::string magic = r.read_line();
    if (magic != kTrajMagic)
        throw FormatError(msgf("'%s': bad magic '%s' (expected %s)",
                               path.string().c_str(), magic.c_str(), kTrajMagic));
    json m = parse_manifest_line(r, r.read_line());
    if (!m.contains("K") || !m.contains("n") || !m.contains("dt") || !m.contains("system") ||
        !m.contains("debug"))
        throw FormatError(msgf("'%s': manifest missing required fields",
                               path.string().c_str()));

    Trajectory traj;
    traj.K = m.at("K").get<size_t>();
    traj.n = m.at("n").get<int>();
    traj.dt = m.at("dt").get<double>();
    bool debug = m.at("debug").get<bool>();
    if (traj.K < 1 || traj.n < 1)
        throw IntegrityError(msgf("'%s': invalid dimensions K=%zu n=%d",
                                  path.string().c_str(), traj.K, traj.n));
    if (debug) {
        if (!m.contains("debug_params"))
            throw FormatError(msgf("'%s': debug flag set but no debug_params present",
                                   path.string().c_str()));
        traj.debug_params = m.at("debug_params").get<std::vector<double>>();
    } else if (m.contains("debug_params")) {
        throw FormatError(msgf("'%s': debug_params present without the debug flag",
                               path.string().c_str()));
    }

    traj.states.resize(traj.K * static_cast<size_t>(traj.n));
    r.read_doubles(traj.states.data(), traj.states.size());
    r.expect_eof();
    for (size_t i = 0; i < traj.states.size(); ++i) {
        if (!std::isfinite(traj.states[i]))
            throw IntegrityError(msgf("'%s': non-finite state value at flat index %zu",
                                      path.string().c_str(), i));
    }
    if (meta) {
        meta->system = m.at("system").get<std::string>();
        meta->debug = debug;
    }
    return traj;
}

void save_collection_index(const std::filesystem::path& dir, const CollectionIndex& index) {
    json m;
    m["format"] = kIndexFormat;
    m["system"] = index.system;
    m["n"] = index.n;
    m["dt"] = index.dt;
    m["K"] = index.K;
    m["count"] = index.count;
    m["substeps"] = index.substeps;
    m["seed"] = index.seed;
    m["debug"] = index.debug;
    m["files"] = index.files;
    m["tool"] = kToolVersion;

    AtomicFileWriter w(dir / "index.json");
    w.write_text(m.dump(2) + "\n");
    w.commit();
}

CollectionIndex load_collection_index(const std::filesystem::path& dir) {
    std::filesystem::path p = dir / "index.json";
    std::ifstream in(p);
    if (!in) throw IoError(msgf("cannot open '%s'", p.string().c_str()));
    json m = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (m.is_discarded() || !m.is_object() || m.value("format", "") != kIndexFormat)
        throw FormatError(msgf("'%s': not a trajectory collection index",
                               p.string().c_str()));
    CollectionIndex idx;
    idx.system = m.at("system").get<std::string>();
    idx.n = m.at("n").get<int>();
    idx.dt = m.at("dt").get<double>();
    idx.K = m.at("K").get<size_t>();
    idx.count = m.at("count").get<size_t>();
    idx.substeps = m.value("substeps", 0);
    idx.seed = m.at("seed").get<uint64_t>();
    idx.debug = m.at("debug").get<bool>();
    idx.files = m.at("files").get<std::vector<std::string>>();
    if (idx.files.size() != idx.count)
        throw IntegrityError(msgf("'%s': index lists %zu files but declares count %zu",
                                  p.string().c_str(), idx.files.size(), idx.count));
    return idx;
}

std::vector<Trajectory> load_collection(const std::filesystem::path& dir,
                                        bool for_training, CollectionIndex* index_out) {
    CollectionIndex idx = load_collection_index(dir);
    std::vector<Trajectory> trajs(idx.count);
    for (size_t i = 0; i < idx.count; ++i) {
        TrajectoryMeta meta;
        trajs[i] = load_trajectory(dir / idx.files[i], &meta);
        if (for_training && (meta.debug || trajs[i].debug_params.has_value()))
            throw ContractViolation(msgf(
                "'%s' carries debug parameters; hidden-parameter discipline forbids "
                "training on it (regenerate without the debug flag)",
                (dir / idx.files[i]).string().c_str()));
    }
    if (index_out) *index_out = idx;
    return trajs;
}

namespace {

void check_generation_config(const GenerationConfig& cfg) {
    require(cfg.num_trajectories >= 1, "generate: need at least one trajectory");
    require(cfg.steps >= 1, "generate: need at least one step per trajectory");
    require(cfg.dt > 0.0, "generate: dt must be positive");
    require(cfg.substeps >= 1, "generate: substeps must be >= 1");
}

// Trajectory i draws its initial condition then its parameters from the
// stream derived from (seed, i), so it is fully determined regardless of
// which worker produces it.
Trajectory generate_one(const SystemSpec& spec, const GenerationConfig& cfg, size_t i) {
    RngStream stream = derive_stream(cfg.seed, i);
    std::vector<double> x0 = sample_initial_condition(spec, stream);
    std::vector<double> alpha = sample_parameters(spec, stream);
    return integrate(spec, x0, alpha, cfg.dt, cfg.steps, cfg.substeps, cfg.debug_params);
}

}  // namespace

std::vector<Trajectory> generate_trajectories(const SystemSpec& spec,
                                              const GenerationConfig& cfg, int threads) {
    check_generation_config(cfg);
    std::vector<Trajectory> trajs(cfg.num_trajectories);
    parallel_for(cfg.num_trajectories, threads,
                 [&](size_t i) { trajs[i] = generate_one(spec, cfg, i); });
    return trajs;
}

size_t generate_collection(const SystemSpec& spec, const GenerationConfig& cfg,
                           const std::filesystem::path& out_dir, int threads) {
    check_generation_config(cfg);
    std::filesystem::create_directories(out_dir);

    parallel_for(cfg.num_trajectories, threads, [&](size_t i) {
        Trajectory traj = generate_one(spec, cfg, i);
        save_trajectory(out_dir / trajectory_file_name(i), traj, system_name(spec.id),
                        cfg.debug_params);
    });

    CollectionIndex idx;
    idx.system = system_name(spec.id);
    idx.n = spec.state_dim;
    idx.dt = cfg.dt;
    idx.K = cfg.steps;
    idx.count = cfg.num_trajectories;
    idx.substeps = cfg.substeps;
    idx.seed = cfg.seed;
    idx.debug = cfg.debug_params;
    idx.files.reserve(cfg.num_trajectories);
    for (size_t i = 0; i < cfg.num_trajectories; ++i)
        idx.files.push_back(trajectory_file_name(i));
    save_collection_index(out_dir, idx);
    return cfg.num_trajectories;
}

}  // namespace memflow
