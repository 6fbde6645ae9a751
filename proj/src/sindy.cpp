#include "phaseflow/sindy.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace phaseflow::sindy {

namespace {

void enumerate_degree(std::size_t dim, unsigned degree, std::vector<unsigned>& current,
                      std::size_t pos, std::vector<std::vector<unsigned>>& out) {
    if (pos + 1 == dim) {
        current[pos] = degree;
        out.push_back(current);
        return;
    }
    for (unsigned e = degree; e + 1 > 0; --e) {
        current[pos] = e;
        enumerate_degree(dim, degree - e, current, pos + 1, out);
    }
}

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

} // namespace

PolyLibrary PolyLibrary::build(std::size_t dimension, std::size_t max_order) {
    if (dimension < 1) throw ConfigError("PolyLibrary: dimension must be at least 1");
    if (max_order < 1) throw ConfigError("PolyLibrary: max_order must be at least 1");
    PolyLibrary lib;
    lib.dimension = dimension;
    lib.max_order = max_order;
    std::vector<unsigned> current(dimension, 0);
    for (unsigned d = 0; d <= max_order; ++d)
        enumerate_degree(dimension, d, current, 0, lib.terms);
    return lib;
}

std::string PolyLibrary::term_name(std::size_t i) const {
    const auto& exps = terms.at(i);
    std::string name;
    for (std::size_t j = 0; j < exps.size(); ++j) {
        if (exps[j] == 0) continue;
        if (!name.empty()) name += "*";
        name += "x" + std::to_string(j + 1);
        if (exps[j] > 1) name += "^" + std::to_string(exps[j]);
    }
    return name.empty() ? "1" : name;
}

std::size_t PolyLibrary::find_term(const std::vector<unsigned>& exponents) const {
    for (std::size_t i = 0; i < terms.size(); ++i)
        if (terms[i] == exponents) return i;
    return npos;
}

double PolyLibrary::eval_term(std::size_t i, std::span<const double> x) const {
    const auto& exps = terms.at(i);
    double v = 1.0;
    for (std::size_t j = 0; j < exps.size(); ++j)
        for (unsigned e = 0; e < exps[j]; ++e) v *= x[j];
    return v;
}

Matrix build_library(const Matrix& samples, const PolyLibrary& lib) {
    if (samples.cols() != lib.dimension) throw ShapeError("build_library: dimension mismatch");
    Matrix theta(samples.rows(), lib.term_count());
    for (std::size_t i = 0; i < samples.rows(); ++i) {
        const std::span<const double> x = samples.row_span(i);
        for (std::size_t j = 0; j < lib.term_count(); ++j) {
            const double v = lib.eval_term(j, x);
            if (!std::isfinite(v))
                throw std::domain_error("build_library: monomial overflow at row " +
                                        std::to_string(i));
            theta(i, j) = v;
        }
    }
    return theta;
}

Matrix build_library(const Matrix& samples, std::size_t max_order) {
    return build_library(samples, PolyLibrary::build(samples.cols(), max_order));
}

std::vector<double> SindyModel::predict(const std::vector<double>& x) const {
    if (x.size() != library.dimension) throw ShapeError("SindyModel::predict: dimension mismatch");
    std::vector<double> y(dim(), 0.0);
    for (std::size_t t = 0; t < library.term_count(); ++t) {
        bool any = false;
        for (std::size_t c = 0; c < dim(); ++c) any = any || xi(t, c) != 0.0;
        if (!any) continue;
        const double v = library.eval_term(t, x);
        for (std::size_t c = 0; c < dim(); ++c) y[c] += xi(t, c) * v;
    }
    return y;
}

Matrix SindyModel::jacobian(const std::vector<double>& x) const {
    if (x.size() != library.dimension)
        throw ShapeError("SindyModel::jacobian: dimension mismatch");
    Matrix jac(dim(), library.dimension, 0.0);
    for (std::size_t t = 0; t < library.term_count(); ++t) {
        const auto& exps = library.terms[t];
        for (std::size_t d = 0; d < library.dimension; ++d) {
            if (exps[d] == 0) continue;
            // d/dx_d of the monomial: e * x_d^{e-1} * prod_{j != d} x_j^{e_j}
            double v = static_cast<double>(exps[d]);
            for (std::size_t j = 0; j < exps.size(); ++j) {
                const unsigned e = exps[j] - (j == d ? 1u : 0u);
                for (unsigned q = 0; q < e; ++q) v *= x[j];
            }
            for (std::size_t c = 0; c < dim(); ++c)
                if (xi(t, c) != 0.0) jac(c, d) += xi(t, c) * v;
        }
    }
    return jac;
}

std::string SindyModel::equations_text() const {
    std::ostringstream os;
    for (std::size_t c = 0; c < dim(); ++c) {
        os << "dx" << (c + 1) << "/dt =";
        bool first = true;
        for (std::size_t t = 0; t < library.term_count(); ++t) {
            const double coef = xi(t, c);
            if (coef == 0.0) continue;
            std::ostringstream num;
            num.precision(6);
            num << std::abs(coef);
            os << (first ? (coef < 0 ? " -" : " ") : (coef < 0 ? " - " : " + "));
            os << num.str();
            if (library.term_name(t) != "1") os << "*" << library.term_name(t);
            first = false;
        }
        if (first) os << " 0";
        os << "\n";
    }
    return os.str();
}

SindyModel stls(const Matrix& theta, const Matrix& targets, const PolyLibrary& lib,
                double threshold, std::size_t max_iter) {
    if (theta.rows() != targets.rows()) throw ShapeError("stls: row count mismatch");
    if (theta.cols() != lib.term_count()) throw ShapeError("stls: library size mismatch");
    if (threshold < 0.0) throw ConfigError("stls: threshold must be non-negative");
    if (max_iter < 1) throw ConfigError("stls: max_iter must be at least 1");

    const std::size_t n = theta.rows();
    const std::size_t p = theta.cols();
    const std::size_t m = targets.cols();

    Eigen::Map<const RowMat> theta_map(theta.data(), static_cast<Eigen::Index>(n),
                                       static_cast<Eigen::Index>(p));
    Eigen::Map<const RowMat> y_map(targets.data(), static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(m));

    SindyModel model;
    model.library = lib;
    model.threshold = threshold;
    model.xi.resize(p, m, 0.0);

    for (std::size_t c = 0; c < m; ++c) {
        std::vector<std::size_t> active(p);
        for (std::size_t t = 0; t < p; ++t) active[t] = t;
        Eigen::VectorXd coeffs;
        for (std::size_t iter = 0; iter < max_iter && !active.empty(); ++iter) {
            Eigen::MatrixXd sub(n, active.size());
            for (std::size_t a = 0; a < active.size(); ++a)
                sub.col(static_cast<Eigen::Index>(a)) =
                    theta_map.col(static_cast<Eigen::Index>(active[a]));
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
            if (qr.rank() < static_cast<Eigen::Index>(active.size()))
                model.warnings.push_back("component " + std::to_string(c + 1) +
                                         ": rank-deficient active set, least-squares fallback");
            coeffs = qr.solve(y_map.col(static_cast<Eigen::Index>(c)));

            std::vector<std::size_t> survivors;
            for (std::size_t a = 0; a < active.size(); ++a)
                if (!(std::abs(coeffs[static_cast<Eigen::Index>(a)]) < threshold))
                    survivors.push_back(active[a]);
            if (survivors.size() == active.size()) break; // support stable
            active = std::move(survivors);                // support only shrinks
        }
        // Write back the surviving coefficients from the last solve.
        if (!active.empty()) {
            // One final solve on the converged support keeps the fit and the
            // threshold invariant consistent.
            Eigen::MatrixXd sub(n, active.size());
            for (std::size_t a = 0; a < active.size(); ++a)
                sub.col(static_cast<Eigen::Index>(a)) =
                    theta_map.col(static_cast<Eigen::Index>(active[a]));
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
            coeffs = qr.solve(y_map.col(static_cast<Eigen::Index>(c)));
            for (std::size_t a = 0; a < active.size(); ++a) {
                const double v = coeffs[static_cast<Eigen::Index>(a)];
                model.xi(active[a], c) = std::abs(v) < threshold ? 0.0 : v;
            }
        }
    }
    return model;
}

SindyModel fit(const Matrix& samples, const Matrix& targets, std::size_t max_order,
               double threshold, std::size_t max_iter) {
    const PolyLibrary lib = PolyLibrary::build(samples.cols(), max_order);
    return stls(build_library(samples, lib), targets, lib, threshold, max_iter);
}

} // namespace phaseflow::sindy
