#include "memflow/kernels.hpp"

namespace memflow {

#if defined(__GNUC__)
#define MEMFLOW_NOINLINE __attribute__((noinline))
#else
#define MEMFLOW_NOINLINE
#endif

MEMFLOW_NOINLINE double dot4(const double* a, const double* b, size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    size_t n4 = n & ~static_cast<size_t>(3);
    size_t i = 0;
    for (; i < n4; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

MEMFLOW_NOINLINE void axpy(double alpha, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace memflow
