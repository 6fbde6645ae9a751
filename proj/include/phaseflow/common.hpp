#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phaseflow {

/// Dense row-major matrix of doubles. The one container shared across modules;
/// decompositions that need more live behind the module APIs.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }
    std::span<double> row_span(std::size_t r) { return {row(r), cols_}; }
    std::span<const double> row_span(std::size_t r) const { return {row(r), cols_}; }

    void fill(double v) { data_.assign(data_.size(), v); }
    void resize(std::size_t rows, std::size_t cols, double fill = 0.0) {
        rows_ = rows;
        cols_ = cols;
        data_.assign(rows * cols, fill);
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Bad dimensions or incompatible operands. CLI maps this family to exit code 2.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration, parameters or usage. Exit code 2.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Malformed or insufficient input data (file contents included). Exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical blow-up during integration or training. Exit code 3.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, std::size_t step_index)
        : std::runtime_error(what), step(step_index) {}
    std::size_t step;
};

/// Per-component magnitude above this is treated as a diverged state.
inline constexpr double kDivergenceGuard = 1e12;

inline bool all_finite(std::span<const double> xs) {
    for (double v : xs) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

inline void require_finite(std::span<const double> xs, const char* what) {
    if (!all_finite(xs)) throw std::domain_error(std::string(what) + ": non-finite entry");
}

} // namespace phaseflow
