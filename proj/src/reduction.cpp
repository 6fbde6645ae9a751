#include "phaseflow/reduction.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace phaseflow::reduction {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

PodResult pod_impl(const SnapshotMatrix& snapshots, double energy_target,
                   std::size_t requested_modes) {
    const std::size_t n = snapshots.data.rows();
    const std::size_t d = snapshots.data.cols();
    if (n < 2) throw DataError("pod: need at least 2 snapshots");
    if (d < 1) throw DataError("pod: empty snapshots");
    const bool weighted = !snapshots.quadrature_weights.empty();
    if (weighted && snapshots.quadrature_weights.size() != d)
        throw ShapeError("pod: quadrature weight length mismatch");
    if (weighted)
        for (double w : snapshots.quadrature_weights)
            if (!(w > 0.0)) throw ConfigError("pod: quadrature weights must be positive");

    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += snapshots.data(i, j);
    for (double& v : mean) v /= static_cast<double>(n);

    // Weighted inner product via sqrt(w) scaling; the SVD then runs in the
    // Euclidean metric.
    RowMat centered(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double v = snapshots.data(i, j) - mean[j];
            if (weighted) v *= std::sqrt(snapshots.quadrature_weights[j]);
            centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const std::size_t full = static_cast<std::size_t>(sv.size());

    std::size_t r;
    if (requested_modes > 0) {
        if (requested_modes > full) throw ConfigError("pod: n_modes exceeds available rank");
        r = requested_modes;
    } else {
        if (!(energy_target > 0.0) || energy_target > 1.0)
            throw ConfigError("pod: energy_target must be in (0, 1]");
        double total = 0.0;
        for (std::size_t i = 0; i < full; ++i) total += sv[static_cast<Eigen::Index>(i)] *
                                                        sv[static_cast<Eigen::Index>(i)];
        double cum = 0.0;
        r = full;
        for (std::size_t i = 0; i < full; ++i) {
            cum += sv[static_cast<Eigen::Index>(i)] * sv[static_cast<Eigen::Index>(i)];
            if (total == 0.0 || cum / total >= energy_target - 1e-12) {
                r = i + 1;
                break;
            }
        }
    }

    PodResult out;
    out.basis.mean = mean;
    out.basis.quadrature_weights = snapshots.quadrature_weights;
    out.basis.singular_values.assign(sv.data(), sv.data() + r);
    out.basis.modes.resize(d, r);
    out.coefficients.resize(n, r);

    const Eigen::MatrixXd& v_mat = svd.matrixV();
    const Eigen::MatrixXd& u_mat = svd.matrixU();
    for (std::size_t k = 0; k < r; ++k) {
        // Sign canonicalization: largest-magnitude mode entry made positive.
        Eigen::Index arg_max = 0;
        v_mat.col(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff(&arg_max);
        const double sign =
            v_mat(arg_max, static_cast<Eigen::Index>(k)) < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            double mode = sign * v_mat(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
            if (weighted) mode /= std::sqrt(snapshots.quadrature_weights[j]);
            out.basis.modes(j, k) = mode;
        }
        for (std::size_t i = 0; i < n; ++i)
            out.coefficients(i, k) = sign * u_mat(static_cast<Eigen::Index>(i),
                                                  static_cast<Eigen::Index>(k)) *
                                     sv[static_cast<Eigen::Index>(k)];
    }
    return out;
}

} // namespace

PodResult pod(const SnapshotMatrix& snapshots, double energy_target) {
    return pod_impl(snapshots, energy_target, 0);
}

PodResult pod_fixed(const SnapshotMatrix& snapshots, std::size_t n_modes) {
    if (n_modes < 1) throw ConfigError("pod: n_modes must be at least 1");
    return pod_impl(snapshots, 0.0, n_modes);
}

std::vector<double> project(const PodBasis& basis, std::span<const double> field) {
    const std::size_t d = basis.field_dim();
    if (field.size() != d) throw ShapeError("project: field dimension mismatch");
    const bool weighted = !basis.quadrature_weights.empty();
    std::vector<double> coeffs(basis.rank(), 0.0);
    for (std::size_t k = 0; k < basis.rank(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double w = weighted ? basis.quadrature_weights[j] : 1.0;
            acc += w * basis.modes(j, k) * (field[j] - basis.mean[j]);
        }
        coeffs[k] = acc;
    }
    return coeffs;
}

std::vector<double> reconstruct(const PodBasis& basis, std::span<const double> coefficients) {
    if (coefficients.size() != basis.rank())
        throw ShapeError("reconstruct: coefficient count mismatch");
    std::vector<double> field(basis.mean);
    for (std::size_t k = 0; k < basis.rank(); ++k)
        for (std::size_t j = 0; j < basis.field_dim(); ++j)
            field[j] += coefficients[k] * basis.modes(j, k);
    return field;
}

} // namespace phaseflow::reduction
