#pragma once

#include <cstddef>

namespace memflow {

// Reduction kernels live in exactly one translation unit and are never
// inlined, so every call site in the program runs the same machine code.
// This pins down floating-point results (summation order, fused multiply-add
// choices) and makes single-vector and batched code paths bit-identical.

// Dot product with four independent accumulators (fixed association order).
double dot4(const double* a, const double* b, size_t n);

// y += alpha * x  (elementwise; no cross-element reduction)
void axpy(double alpha, const double* x, double* y, size_t n);

}  // namespace memflow
