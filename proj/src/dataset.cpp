#include "memflow/dataset.hpp"

#include <cstring>

#include <json.hpp>

#include "memflow/errors.hpp"
#include "memflow/io_util.hpp"
#include "memflow/version.hpp"

namespace memflow {

using nlohmann::json;

namespace {
constexpr const char* kDatasetMagic = "MFD1";

void copy_rows(const Trajectory& traj, size_t first_row, size_t row_count, double* dst) {
    std::memcpy(dst, traj.row(first_row),
                row_count * static_cast<size_t>(traj.n) * sizeof(double));
}
}  // namespace

TrainingSample window(const Trajectory& traj, size_t k, int n_M, int n_R) {
    require(n_M >= 0, "window: n_M must be >= 0");
    require(n_R >= 1, "window: n_R must be >= 1");
    const size_t n_tot = static_cast<size_t>(n_M) + static_cast<size_t>(n_R) + 1;
    require(traj.K >= n_tot, msgf("window: trajectory has %zu rows, needs at least %zu",
                                  traj.K, n_tot));
    const size_t k_max = traj.K - n_tot;
    require(k <= k_max,
            msgf("window: start index %zu out of range (k + n_M + n_R <= K - 1 requires "
                 "k <= %zu)",
                 k, k_max));

    TrainingSample s;
    s.x_in.resize(static_cast<size_t>(n_M + 1) * static_cast<size_t>(traj.n));
    s.y_out.resize(static_cast<size_t>(n_R) * static_cast<size_t>(traj.n));
    copy_rows(traj, k, static_cast<size_t>(n_M) + 1, s.x_in.data());
    copy_rows(traj, k + static_cast<size_t>(n_M) + 1, static_cast<size_t>(n_R),
              s.y_out.data());
    return s;
}

BuildResult build_training_set(const std::vector<Trajectory>& trajs, int n_M, int n_R,
                               int samples_per_traj, uint64_t seed) {
    require(n_M >= 0, "build_training_set: n_M must be >= 0");
    require(n_R >= 1, "build_training_set: n_R must be >= 1");
    require(samples_per_traj >= 1, "build_training_set: samples_per_traj must be >= 1");
    require(!trajs.empty(), "build_training_set: no trajectories given");

    const size_t n_tot = static_cast<size_t>(n_M) + static_cast<size_t>(n_R) + 1;
    const int n = trajs.front().n;
    const double dt = trajs.front().dt;
    for (const Trajectory& t : trajs) {
        require(t.n == n, "build_training_set: trajectories disagree on state dimension");
        require(t.dt == dt, "build_training_set: trajectories disagree on time step");
    }

    size_t admitted = 0, skipped = 0;
    for (const Trajectory& t : trajs) (t.K >= n_tot ? admitted : skipped) += 1;
    if (admitted == 0)
        throw EmptyDatasetError(msgf(
            "build_training_set: every trajectory is shorter than n_tot = %zu rows", n_tot));

    BuildResult result;
    result.skipped_trajectories = skipped;
    Dataset& ds = result.dataset;
    ds.meta.n = n;
    ds.meta.n_M = n_M;
    ds.meta.n_R = n_R;
    ds.meta.dt = dt;
    ds.meta.source_seed = seed;
    ds.meta.J = admitted * static_cast<uint64_t>(samples_per_traj);
    ds.x_in = Mat(ds.meta.J, static_cast<size_t>(ds.meta.x_width()));
    ds.y_out = Mat(ds.meta.J, static_cast<size_t>(ds.meta.y_width()));

    // Start indices come from a per-trajectory derived stream, so the
    // sample multiset depends only on (seed, trajectory order), never on
    // scheduling.
    size_t j = 0;
    for (size_t ti = 0; ti < trajs.size(); ++ti) {
        const Trajectory& traj = trajs[ti];
        if (traj.K < n_tot) continue;
        RngStream stream = derive_stream(seed, ti);
        const uint64_t range = traj.K - n_tot + 1;
        for (int s = 0; s < samples_per_traj; ++s, ++j) {
            const size_t k = stream.uniform_index(range);
            copy_rows(traj, k, static_cast<size_t>(n_M) + 1, ds.x_in.row(j));
            copy_rows(traj, k + static_cast<size_t>(n_M) + 1, static_cast<size_t>(n_R),
                      ds.y_out.row(j));
        }
    }
    return result;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
    require(ds.meta.J >= 1, "save_dataset: dataset is empty");
    require(ds.x_in.rows == ds.meta.J && ds.y_out.rows == ds.meta.J,
            "save_dataset: row counts do not match J");
    require(ds.x_in.cols == static_cast<size_t>(ds.meta.x_width()) &&
                ds.y_out.cols == static_cast<size_t>(ds.meta.y_width()),
            "save_dataset: widths do not match the declared (n, n_M, n_R)");

    json m;
    m["J"] = ds.meta.J;
    m["dt"] = ds.meta.dt;
    m["n"] = ds.meta.n;
    m["n_mem"] = ds.meta.n_M;
    m["n_rec"] = ds.meta.n_R;
    m["seed"] = ds.meta.source_seed;
    m["tool"] = kToolVersion;

    AtomicFileWriter w(path);
    w.write_text(std::string(kDatasetMagic) + "\n");
    w.write_text(m.dump() + "\n");
    w.write_doubles(ds.x_in.a.data(), ds.x_in.a.size());
    w.write_doubles(ds.y_out.a.data(), ds.y_out.a.size());
    w.commit();
}

Dataset load_dataset(const std::filesystem::path& path) {
    FileReader r(path);
    std::string magic = r.read_line();
    if (magic != kDatasetMagic)
        throw FormatError(msgf("'%s': bad magic '%s' (expected %s)",
                               path.string().c_str(), magic.c_str(), kDatasetMagic));
    json m = json::parse(r.read_line(), nullptr, /*allow_exceptions=*/false);
    if (m.is_discarded() || !m.is_object())
        throw FormatError(msgf("'%s': malformed header line", path.string().c_str()));
    for (const char* key : {"J", "dt", "n", "n_mem", "n_rec", "seed"})
        if (!m.contains(key))
            throw FormatError(msgf("'%s': header missing field '%s'",
                                   path.string().c_str(), key));

    Dataset ds;
    ds.meta.J = m.at("J").get<uint64_t>();
    ds.meta.dt = m.at("dt").get<double>();
    ds.meta.n = m.at("n").get<int>();
    ds.meta.n_M = m.at("n_mem").get<int>();
    ds.meta.n_R = m.at("n_rec").get<int>();
    ds.meta.source_seed = m.at("seed").get<uint64_t>();
    if (ds.meta.J < 1 || ds.meta.n < 1 || ds.meta.n_M < 0 || ds.meta.n_R < 1)
        throw IntegrityError(msgf("'%s': invalid header values", path.string().c_str()));

    ds.x_in = Mat(ds.meta.J, static_cast<size_t>(ds.meta.x_width()));
    ds.y_out = Mat(ds.meta.J, static_cast<size_t>(ds.meta.y_width()));
    r.read_doubles(ds.x_in.a.data(), ds.x_in.a.size());
    r.read_doubles(ds.y_out.a.data(), ds.y_out.a.size());
    r.expect_eof();
    return ds;
}

}  // namespace memflow
