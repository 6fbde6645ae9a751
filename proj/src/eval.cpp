#include "phaseflow/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace phaseflow::eval {

Matrix DynamicsModel::jacobian(const std::vector<double>& x) const {
    // Central finite differences, h = 1e-5 scaled by coordinate magnitude.
    const std::size_t m = dim();
    Matrix jac(m, m);
    std::vector<double> xp = x, xm = x;
    for (std::size_t c = 0; c < m; ++c) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[c]));
        xp[c] = x[c] + h;
        xm[c] = x[c] - h;
        const std::vector<double> fp = predict(xp);
        const std::vector<double> fm = predict(xm);
        for (std::size_t r = 0; r < m; ++r) jac(r, c) = (fp[r] - fm[r]) / (2.0 * h);
        xp[c] = x[c];
        xm[c] = x[c];
    }
    return jac;
}

ErrorSeries local_errors(const DynamicsModel& model, const Matrix& features,
                         const Matrix& targets) {
    if (features.rows() != targets.rows() || features.cols() != targets.cols())
        throw ShapeError("local_errors: feature/target mismatch");
    if (features.cols() != model.dim()) throw ShapeError("local_errors: dimension mismatch");

    ErrorSeries out;
    out.norm.resize(features.rows());
    out.per_component.resize(features.rows(), features.cols());
    std::vector<double> x(features.cols());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        std::copy(features.row(i), features.row(i) + features.cols(), x.begin());
        const std::vector<double> pred = model.predict(x);
        double acc = 0.0;
        for (std::size_t j = 0; j < features.cols(); ++j) {
            const double d = targets(i, j) - pred[j];
            out.per_component(i, j) = std::abs(d);
            acc += d * d;
        }
        out.norm[i] = std::sqrt(acc);
    }
    return out;
}

systems::Trajectory rollout(const DynamicsModel& model, const std::vector<double>& x0, double dt,
                            std::size_t n) {
    if (dt <= 0.0) throw ConfigError("rollout: dt must be positive");
    if (n < 1) throw ConfigError("rollout: n must be at least 1");
    if (x0.size() != model.dim()) throw ShapeError("rollout: initial state dimension mismatch");

    systems::Trajectory traj;
    traj.dt = dt;
    traj.system_tag = "rollout";
    traj.states.resize(n + 1, x0.size());
    std::vector<double> x = x0;
    for (std::size_t j = 0; j < x.size(); ++j) traj.states(0, j) = x[j];
    for (std::size_t k = 0; k < n; ++k) {
        const std::vector<double> f = model.predict(x);
        bool bad = false;
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] += dt * f[j];
            if (!(std::abs(x[j]) <= kDivergenceGuard)) bad = true;
            traj.states(k + 1, j) = x[j];
        }
        if (bad) {
            systems::Trajectory partial;
            partial.dt = dt;
            partial.system_tag = traj.system_tag;
            partial.states.resize(k + 2, x.size());
            for (std::size_t r = 0; r <= k + 1; ++r)
                std::copy(traj.states.row(r), traj.states.row(r) + x.size(),
                          partial.states.row(r));
            throw RolloutDiverged("rollout: diverged at step " + std::to_string(k + 1), k + 1,
                                  std::move(partial));
        }
    }
    return traj;
}

ErrorSeries global_errors(const systems::Trajectory& reference,
                          const systems::Trajectory& predicted) {
    if (reference.length() != predicted.length() || reference.dim() != predicted.dim())
        throw ShapeError("global_errors: trajectory shape mismatch");
    ErrorSeries out;
    out.norm.resize(reference.length());
    out.per_component.resize(reference.length(), reference.dim());
    for (std::size_t i = 0; i < reference.length(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < reference.dim(); ++j) {
            const double d = reference.states(i, j) - predicted.states(i, j);
            out.per_component(i, j) = std::abs(d);
            acc += d * d;
        }
        out.norm[i] = std::sqrt(acc);
    }
    return out;
}

R2Result r2_score(const Matrix& targets, const Matrix& predictions) {
    if (targets.rows() != predictions.rows() || targets.cols() != predictions.cols())
        throw ShapeError("r2_score: shape mismatch");
    if (targets.rows() < 2) throw DataError("r2_score: need at least 2 samples");

    R2Result out;
    out.per_component.assign(targets.cols(), std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t j = 0; j < targets.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < targets.rows(); ++i) mean += targets(i, j);
        mean /= static_cast<double>(targets.rows());
        double ss_res = 0.0, ss_tot = 0.0;
        for (std::size_t i = 0; i < targets.rows(); ++i) {
            const double r = targets(i, j) - predictions(i, j);
            const double d = targets(i, j) - mean;
            ss_res += r * r;
            ss_tot += d * d;
        }
        if (ss_tot == 0.0) {
            out.warnings.push_back("component " + std::to_string(j + 1) +
                                   " has zero variance, excluded from R^2");
            continue;
        }
        out.per_component[j] = 1.0 - ss_res / ss_tot;
        sum += out.per_component[j];
        ++counted;
    }
    out.scalar = counted > 0 ? sum / static_cast<double>(counted)
                             : std::numeric_limits<double>::quiet_NaN();
    return out;
}

StepwiseGrid stepwise_error_grid(const DynamicsModel& model, const systems::TargetFn& truth,
                                 std::pair<double, double> x1_bounds,
                                 std::pair<double, double> x2_bounds, std::size_t resolution) {
    if (model.dim() != 2) throw ConfigError("stepwise_error_grid: grid export needs M = 2");
    if (resolution < 2) throw ConfigError("stepwise_error_grid: resolution must be at least 2");
    if (!(x1_bounds.first < x1_bounds.second) || !(x2_bounds.first < x2_bounds.second))
        throw ConfigError("stepwise_error_grid: empty bounds");

    StepwiseGrid grid;
    grid.resolution_x = resolution;
    grid.resolution_y = resolution;
    const std::size_t total = resolution * resolution;
    grid.x1.reserve(total);
    grid.x2.reserve(total);
    grid.error.reserve(total);
    grid.truth_dx.reserve(total);
    grid.truth_dy.reserve(total);
    grid.pred_dx.reserve(total);
    grid.pred_dy.reserve(total);

    double sum = 0.0;
    for (std::size_t iy = 0; iy < resolution; ++iy) {
        const double x2 = x2_bounds.first + (x2_bounds.second - x2_bounds.first) *
                                                static_cast<double>(iy) /
                                                static_cast<double>(resolution - 1);
        for (std::size_t ix = 0; ix < resolution; ++ix) {
            const double x1 = x1_bounds.first + (x1_bounds.second - x1_bounds.first) *
                                                    static_cast<double>(ix) /
                                                    static_cast<double>(resolution - 1);
            const std::vector<double> x{x1, x2};
            const std::vector<double> f_true = truth(x);
            const std::vector<double> f_pred = model.predict(x);
            const double e = std::hypot(f_true[0] - f_pred[0], f_true[1] - f_pred[1]);
            grid.x1.push_back(x1);
            grid.x2.push_back(x2);
            grid.error.push_back(e);
            grid.truth_dx.push_back(f_true[0]);
            grid.truth_dy.push_back(f_true[1]);
            grid.pred_dx.push_back(f_pred[0]);
            grid.pred_dy.push_back(f_pred[1]);
            sum += e;
            grid.max_error = std::max(grid.max_error, e);
        }
    }
    grid.mean_error = sum / static_cast<double>(total);
    return grid;
}

std::vector<double> stepwise_errors(const DynamicsModel& model, const systems::TargetFn& truth,
                                    const Matrix& points) {
    if (points.cols() != model.dim()) throw ShapeError("stepwise_errors: dimension mismatch");
    std::vector<double> out(points.rows());
    std::vector<double> x(points.cols());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        std::copy(points.row(i), points.row(i) + points.cols(), x.begin());
        const std::vector<double> f_true = truth(x);
        const std::vector<double> f_pred = model.predict(x);
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double d = f_true[j] - f_pred[j];
            acc += d * d;
        }
        out[i] = std::sqrt(acc);
    }
    return out;
}

JacobianDiagnostics jacobian_diagnostics(const DynamicsModel& model, const Matrix& points,
                                         double dt) {
    if (points.cols() != model.dim()) throw ShapeError("jacobian_diagnostics: dimension mismatch");
    const std::size_t m = model.dim();

    JacobianDiagnostics out;
    out.dt = dt;
    out.max_singular_value.resize(points.rows());
    out.frobenius_norm.resize(points.rows());
    out.eigenvalues.resize(points.rows());

    std::vector<double> x(m);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        std::copy(points.row(i), points.row(i) + m, x.begin());
        const Matrix jac = model.jacobian(x);
        Eigen::MatrixXd j_eig(m, m);
        double fro = 0.0;
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) {
                j_eig(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = jac(r, c);
                fro += jac(r, c) * jac(r, c);
            }
        out.frobenius_norm[i] = std::sqrt(fro);

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(j_eig);
        out.max_singular_value[i] = svd.singularValues()(0);

        Eigen::EigenSolver<Eigen::MatrixXd> es(j_eig, false);
        if (es.info() != Eigen::Success) {
            out.warnings.push_back("eigen-solver failed at point " + std::to_string(i));
            out.eigenvalues[i].assign(m, {std::numeric_limits<double>::quiet_NaN(),
                                          std::numeric_limits<double>::quiet_NaN()});
            continue;
        }
        out.eigenvalues[i].resize(m);
        for (std::size_t k = 0; k < m; ++k)
            out.eigenvalues[i][k] = es.eigenvalues()(static_cast<Eigen::Index>(k));
    }
    return out;
}

std::vector<std::complex<double>> rk5_stability_boundary(std::size_t n_angles) {
    auto poly_mag = [](std::complex<double> z) {
        std::complex<double> p{1.0, 0.0};
        std::complex<double> zk{1.0, 0.0};
        double fact = 1.0;
        for (int k = 1; k <= 5; ++k) {
            zk *= z;
            fact *= static_cast<double>(k);
            p += zk / fact;
        }
        return std::abs(p);
    };

    std::vector<std::complex<double>> boundary;
    boundary.reserve(n_angles);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t a = 0; a < n_angles; ++a) {
        const double theta = two_pi * static_cast<double>(a) / static_cast<double>(n_angles);
        const std::complex<double> dir{std::cos(theta), std::sin(theta)};
        // Outermost |p| <= 1 radius along the ray: coarse scan then bisection.
        double r_in = 0.0;
        const double r_max = 6.0;
        const double step = 0.005;
        for (double r = r_max; r > 0.0; r -= step) {
            if (poly_mag(r * dir) <= 1.0) {
                r_in = r;
                break;
            }
        }
        double lo = r_in, hi = std::min(r_in + step, r_max);
        if (r_in > 0.0) {
            for (int it = 0; it < 50; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (poly_mag(mid * dir) <= 1.0)
                    lo = mid;
                else
                    hi = mid;
            }
        }
        boundary.push_back(lo * dir);
    }
    return boundary;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return cov / std::sqrt(va * vb);
}

} // namespace phaseflow::eval
