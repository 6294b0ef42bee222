#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace memflow {

// Dense row-major matrix of doubles.  Deliberately dumb storage: the
// numerical kernels that need pinned floating-point behavior are free
// functions (see kernels.hpp and the network implementation).
struct Mat {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double* row(size_t i) { return a.data() + i * cols; }
    const double* row(size_t i) const { return a.data() + i * cols; }

    double& at(size_t i, size_t j) { return a[i * cols + j]; }
    const double& at(size_t i, size_t j) const { return a[i * cols + j]; }

    size_t size() const { return a.size(); }
    void zero() { std::fill(a.begin(), a.end(), 0.0); }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    friend bool operator==(const Mat& x, const Mat& y) {
        return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
    }
};

using Vec = std::vector<double>;

}  // namespace memflow
