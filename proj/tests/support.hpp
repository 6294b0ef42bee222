#pragma once

// Shared helpers for the test binaries.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "memflow/integrate.hpp"
#include "memflow/matrix.hpp"

namespace testsupport {

// Unique scratch directory, removed on scope exit.
struct TmpDir {
    std::filesystem::path path;

    TmpDir() {
        static std::atomic<unsigned> counter{0};
        const unsigned id = counter++;
        path = std::filesystem::temp_directory_path() /
               ("memflow_test_" + std::to_string(id) + "_" +
                std::to_string(reinterpret_cast<uintptr_t>(this) & 0xFFFFu));
        std::filesystem::create_directories(path);
    }
    ~TmpDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TmpDir(const TmpDir&) = delete;
    TmpDir& operator=(const TmpDir&) = delete;
};

// Trajectory whose row k holds (base_c + k * slope_c) per component.
inline memflow::Trajectory line_trajectory(int n, size_t K, double dt,
                                           const std::vector<double>& base,
                                           const std::vector<double>& slope) {
    memflow::Trajectory t;
    t.n = n;
    t.K = K;
    t.dt = dt;
    t.states.resize(K * static_cast<size_t>(n));
    for (size_t k = 0; k < K; ++k)
        for (int c = 0; c < n; ++c)
            t.row(k)[c] = base[static_cast<size_t>(c)] +
                          static_cast<double>(k) * slope[static_cast<size_t>(c)];
    return t;
}

// Scalar convenience: component c runs base + 10c + k * slope, so every
// column is distinct and row/column mixups cannot cancel out.
inline memflow::Trajectory line_trajectory(int n, size_t K, double dt, double base,
                                           double slope) {
    std::vector<double> bases(static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) bases[static_cast<size_t>(c)] = base + 10.0 * c;
    return line_trajectory(n, K, dt, bases,
                           std::vector<double>(static_cast<size_t>(n), slope));
}

inline memflow::Trajectory const_trajectory(int n, size_t K, double dt, double value) {
    return line_trajectory(n, K, dt, std::vector<double>(static_cast<size_t>(n), value),
                           std::vector<double>(static_cast<size_t>(n), 0.0));
}

// Relative error with the unit floor used by every gradient check here.
inline double rel_err(double a, double b) {
    const double denom = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) / denom;
}

}  // namespace testsupport
