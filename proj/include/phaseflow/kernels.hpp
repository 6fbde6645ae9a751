#pragma once

#include <cstddef>

// Dense inner-loop primitives behind the network and solver code paths.
// Every operation has a scalar reference implementation and, on x86-64 with
// AVX2+FMA, a vectorized variant. The active table is picked once at startup
// from CPU capabilities; PHASEFLOW_KERNELS=scalar|avx2 overrides the choice.
// The two variants are equivalence-tested against each other in the test
// suite. Summation order is fixed within each variant, so results are
// bit-reproducible for a given table.

namespace phaseflow::kernels {

struct Ops {
    // C (m x n) = A (m x k) * B (k x n); accumulate adds into C instead.
    void (*matmul_nn)(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate);
    // C (m x n) = A (m x k) * B^T with B stored (n x k).
    void (*matmul_nt)(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate);
    // C (m x n) = A^T * B with A stored (k x m), B stored (k x n).
    void (*matmul_tn)(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // x *= alpha
    void (*scale)(double alpha, double* x, std::size_t n);
    // out = a .* b  (out may alias a)
    void (*hadamard)(const double* a, const double* b, double* out, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sumsq)(const double* x, std::size_t n);
    // mat (rows x cols) += row broadcast over rows
    void (*add_row)(double* mat, const double* row, std::size_t rows, std::size_t cols);

    const char* name;
};

/// Table selected at startup (CPU detection + PHASEFLOW_KERNELS override).
const Ops& active();

/// Reference implementation, always available.
const Ops& scalar_ops();

/// AVX2 implementation, or nullptr when unsupported by build or CPU.
const Ops* avx2_ops();

} // namespace phaseflow::kernels
