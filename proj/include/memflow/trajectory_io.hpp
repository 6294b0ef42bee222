#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "memflow/integrate.hpp"
#include "memflow/system.hpp"

namespace memflow {

// ---------------------------------------------------------------------------
// "MFT1" trajectory file:
//   line 1: "MFT1"
//   line 2: one-line JSON manifest {"K":..,"debug":..,"dt":..,"n":..,
//            "system":..,"tool":..} plus "debug_params":[..] when debug=true
//   then:   K*n little-endian float64 values, row-major
// One file per trajectory; a collection is a directory of such files plus
// an "index.json" manifest listing them in order.
// ---------------------------------------------------------------------------

struct TrajectoryMeta {
    std::string system;
    bool debug = false;
};

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj,
                     const std::string& system, bool debug);
Trajectory load_trajectory(const std::filesystem::path& path, TrajectoryMeta* meta = nullptr);

struct CollectionIndex {
    std::string system;
    int n = 0;
    double dt = 0.0;
    size_t K = 0;
    size_t count = 0;
    int substeps = 0;
    uint64_t seed = 0;
    bool debug = false;
    std::vector<std::string> files;  // relative to the collection directory
};

void save_collection_index(const std::filesystem::path& dir, const CollectionIndex& index);
CollectionIndex load_collection_index(const std::filesystem::path& dir);

// Loads every trajectory listed in the index.  When `for_training` is set,
// any file carrying debug parameters is refused (hidden-parameter
// discipline: training inputs must not contain parameter information).
std::vector<Trajectory> load_collection(const std::filesystem::path& dir,
                                        bool for_training,
                                        CollectionIndex* index_out = nullptr);

struct GenerationConfig {
    size_t num_trajectories = 0;
    size_t steps = 0;  // rows per trajectory (K)
    double dt = 0.0;
    int substeps = 4;
    uint64_t seed = 0;
    bool debug_params = false;
};

// Samples (x0, alpha) per trajectory from independent derived streams and
// integrates the true system; trajectory i is fully determined by
// (seed, i), so results are identical for any worker count.  Returns the
// number of trajectories written.
size_t generate_collection(const SystemSpec& spec, const GenerationConfig& cfg,
                           const std::filesystem::path& out_dir, int threads);

// Same sampling and integration, kept in memory: element i equals the file
// trajectory i of generate_collection with the same configuration.
std::vector<Trajectory> generate_trajectories(const SystemSpec& spec,
                                              const GenerationConfig& cfg, int threads);

}  // namespace memflow
