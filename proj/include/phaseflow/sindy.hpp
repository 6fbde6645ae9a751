#pragma once

#include <span>
#include <string>
#include <vector>

#include "phaseflow/common.hpp"

namespace phaseflow::sindy {

/// Monomial dictionary up to total degree p over M variables. Terms are
/// ordered by total degree ascending, then lexicographically within a degree
/// with x1 ranked highest (1, x1, x2, x1^2, x1*x2, x2^2, ...); the constant
/// comes first. Term count is C(M + p, p).
struct PolyLibrary {
    std::size_t dimension = 0;
    std::size_t max_order = 0;
    std::vector<std::vector<unsigned>> terms; // exponent multi-indices

    static PolyLibrary build(std::size_t dimension, std::size_t max_order);

    std::size_t term_count() const { return terms.size(); }
    std::string term_name(std::size_t i) const;
    std::size_t find_term(const std::vector<unsigned>& exponents) const; // npos when absent
    double eval_term(std::size_t i, std::span<const double> x) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Theta: N x term_count, column j = monomial j at each sample.
Matrix build_library(const Matrix& samples, const PolyLibrary& lib);
Matrix build_library(const Matrix& samples, std::size_t max_order);

struct SindyModel {
    PolyLibrary library;
    Matrix xi; // term_count x M
    double threshold = 0.0;
    std::vector<std::string> warnings;

    std::size_t dim() const { return xi.cols(); }
    std::vector<double> predict(const std::vector<double>& x) const;
    /// Exact Jacobian from monomial derivatives.
    Matrix jacobian(const std::vector<double>& x) const;
    /// Human-readable equations, coefficients to 6 significant digits.
    std::string equations_text() const;
};

/// Sequential thresholded least squares, per output component. Coefficients
/// strictly below the threshold are zeroed; ties are kept. The active-set
/// solve uses a rank-revealing column-pivoted QR; a rank-deficient active set
/// records a warning and keeps the least-squares solution.
SindyModel stls(const Matrix& theta, const Matrix& targets, const PolyLibrary& lib,
                double threshold, std::size_t max_iter = 10);

/// build_library + stls in one call.
SindyModel fit(const Matrix& samples, const Matrix& targets, std::size_t max_order,
               double threshold, std::size_t max_iter = 10);

} // namespace phaseflow::sindy
