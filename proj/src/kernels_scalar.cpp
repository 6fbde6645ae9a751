#include "phaseflow/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace phaseflow::kernels {

namespace {

void matmul_nn_scalar(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void matmul_nt_scalar(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = accumulate ? crow[j] + acc : acc;
        }
    }
}

void matmul_tn_scalar(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            double* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void hadamard_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sumsq_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void add_row_scalar(double* mat, const double* row, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* mrow = mat + r * cols;
        for (std::size_t j = 0; j < cols; ++j) mrow[j] += row[j];
    }
}

constexpr Ops kScalarOps = {
    matmul_nn_scalar, matmul_nt_scalar, matmul_tn_scalar,
    axpy_scalar,      scale_scalar,     hadamard_scalar,
    dot_scalar,       sumsq_scalar,     add_row_scalar,
    "scalar",
};

const Ops* select_active() {
    const char* forced = std::getenv("PHASEFLOW_KERNELS");
    const Ops* avx2 = avx2_ops();
    if (forced) {
        if (std::strcmp(forced, "scalar") == 0) return &kScalarOps;
        if (std::strcmp(forced, "avx2") == 0 && avx2) return avx2;
    }
    return avx2 ? avx2 : &kScalarOps;
}

} // namespace

const Ops& scalar_ops() { return kScalarOps; }

const Ops& active() {
    static const Ops* chosen = select_active();
    return *chosen;
}

} // namespace phaseflow::kernels
