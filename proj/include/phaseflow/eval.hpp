#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phaseflow/common.hpp"
#include "phaseflow/sindy.hpp"
#include "phaseflow/systems.hpp"
#include "phaseflow/train.hpp"

namespace phaseflow::eval {

/// Predictor of the increment target F_r with an optional input Jacobian.
/// The default Jacobian falls back to central finite differences.
class DynamicsModel {
public:
    virtual ~DynamicsModel() = default;
    virtual std::size_t dim() const = 0;
    virtual std::vector<double> predict(const std::vector<double>& x) const = 0;
    virtual bool has_analytic_jacobian() const { return false; }
    virtual Matrix jacobian(const std::vector<double>& x) const;
};

/// Normalization-aware wrapper over a trained network.
class MlpDynamics : public DynamicsModel {
public:
    explicit MlpDynamics(train::MlpModel model) : model_(std::move(model)) {}
    std::size_t dim() const override { return model_.dim(); }
    std::vector<double> predict(const std::vector<double>& x) const override {
        return model_.predict(x);
    }
    bool has_analytic_jacobian() const override { return true; }
    Matrix jacobian(const std::vector<double>& x) const override {
        return model_.input_jacobian(x);
    }
    const train::MlpModel& model() const { return model_; }

private:
    train::MlpModel model_;
};

class SindyDynamics : public DynamicsModel {
public:
    explicit SindyDynamics(sindy::SindyModel model) : model_(std::move(model)) {}
    std::size_t dim() const override { return model_.dim(); }
    std::vector<double> predict(const std::vector<double>& x) const override {
        return model_.predict(x);
    }
    bool has_analytic_jacobian() const override { return true; }
    Matrix jacobian(const std::vector<double>& x) const override { return model_.jacobian(x); }

private:
    sindy::SindyModel model_;
};

/// Wraps an exact target function (oracle models in tests and truth fields).
class CallableDynamics : public DynamicsModel {
public:
    CallableDynamics(systems::TargetFn fn, std::size_t dim) : fn_(std::move(fn)), dim_(dim) {}
    std::size_t dim() const override { return dim_; }
    std::vector<double> predict(const std::vector<double>& x) const override { return fn_(x); }

private:
    systems::TargetFn fn_;
    std::size_t dim_;
};

struct ErrorSeries {
    std::vector<double> norm; // ||.||_2 per step
    Matrix per_component;     // |.| per step and component
};

/// A-priori errors e_local^i = ||y^i - f(x^i)||_2 on exact states.
ErrorSeries local_errors(const DynamicsModel& model, const Matrix& features,
                         const Matrix& targets);

/// A-posteriori map x^{k+1} = x^k + dt f(x^k). On blow-up throws
/// RolloutDiverged carrying the partial trajectory.
systems::Trajectory rollout(const DynamicsModel& model, const std::vector<double>& x0, double dt,
                            std::size_t n);

struct RolloutDiverged : DivergenceError {
    RolloutDiverged(const std::string& what, std::size_t step, systems::Trajectory traj)
        : DivergenceError(what, step), partial(std::move(traj)) {}
    systems::Trajectory partial;
};

/// e_global^i = ||x^i - xhat^i||_2 between aligned trajectories.
ErrorSeries global_errors(const systems::Trajectory& reference,
                          const systems::Trajectory& predicted);

struct R2Result {
    double scalar = 0.0;
    std::vector<double> per_component;
    std::vector<std::string> warnings; // zero-variance components excluded
};

/// Uniform averaged coefficient of determination over components.
R2Result r2_score(const Matrix& targets, const Matrix& predictions);

struct StepwiseGrid {
    std::size_t resolution_x = 0, resolution_y = 0;
    std::vector<double> x1, x2;              // row-major grid coordinates
    std::vector<double> error;               // ||F(x) - f(x)||_2
    std::vector<double> truth_dx, truth_dy;  // direction fields for quiver plots
    std::vector<double> pred_dx, pred_dy;
    double mean_error = 0.0;
    double max_error = 0.0;
};

/// e_stepwise over a uniform 2-D grid; truth and prediction vectors exported
/// alongside. Two-dimensional states only.
StepwiseGrid stepwise_error_grid(const DynamicsModel& model, const systems::TargetFn& truth,
                                 std::pair<double, double> x1_bounds,
                                 std::pair<double, double> x2_bounds, std::size_t resolution);

/// e_stepwise(x) = ||F(x) - f(x)||_2 at arbitrary points (any dimension).
std::vector<double> stepwise_errors(const DynamicsModel& model, const systems::TargetFn& truth,
                                    const Matrix& points);

struct JacobianDiagnostics {
    std::vector<double> max_singular_value;                      // per point
    std::vector<double> frobenius_norm;                          // per point
    std::vector<std::vector<std::complex<double>>> eigenvalues;  // per point, size M
    double dt = 0.0;                                             // scaling for eig*dt
    std::vector<std::string> warnings;
};

/// Jacobian spectra along a set of states; eigenvalues scaled by dt feed the
/// linear stability diagram.
JacobianDiagnostics jacobian_diagnostics(const DynamicsModel& model, const Matrix& points,
                                         double dt);

/// Boundary of |sum_{k=0}^{5} z^k / k!| = 1 (degree-5 truncated exponential,
/// the reference region for an explicit 5th-order Runge-Kutta), sampled along
/// n_angles rays from the origin.
std::vector<std::complex<double>> rk5_stability_boundary(std::size_t n_angles = 720);

/// Pearson correlation between two equal-length series (NaN when degenerate).
double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

} // namespace phaseflow::eval
