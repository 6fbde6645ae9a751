#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "phaseflow/common.hpp"
#include "phaseflow/net.hpp"
#include "phaseflow/systems.hpp"

namespace phaseflow::train {

struct Dataset {
    Matrix features; // N x M
    Matrix targets;  // N x M

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
};

/// Per-component standardization statistics. Components with (near) zero
/// spread get their std floored and are listed in `degenerate`.
struct NormStats {
    std::vector<double> feature_mean, feature_std;
    std::vector<double> target_mean, target_std;
    std::vector<std::string> degenerate;
};

enum class DataRole { Feature, Target };

NormStats fit_norm(const Matrix& features, const Matrix& targets);
Matrix normalize(const NormStats& stats, const Matrix& data, DataRole role);
Matrix denormalize(const NormStats& stats, const Matrix& data, DataRole role);

/// Disjoint, seed-reproducible index split. The validation count rounds to
/// nearest and is at least 1 whenever fraction > 0.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_train_val(std::size_t n, double fraction, std::uint64_t seed);

struct TrainConfig {
    std::vector<std::size_t> layer_sizes;
    net::Activation activation = net::Activation::Swish;
    double ptanh_slope = 0.25;
    double learning_rate = 2e-3;
    double lambda = 0.0;
    std::size_t batch_size = 64;
    std::size_t epochs = 1;
    double val_fraction = 0.2;
    std::size_t patience = 500;
    std::uint64_t seed = 0;
};

struct AdamState {
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
    std::vector<double> m, v;
    std::size_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam update, in place. Throws DivergenceError on
/// non-finite gradients.
void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grads,
               double learning_rate);

struct LearningCurve {
    std::vector<double> train_loss;
    std::vector<double> val_loss; // NaN when no validation split
    std::vector<double> val_r2;
};

/// Trained network bundled with its normalization; predictions run in
/// original units (normalize -> net -> denormalize).
struct MlpModel {
    net::MlpParams params;
    NormStats norm;
    double lambda = 0.0;

    std::size_t dim() const { return params.input_dim(); }
    std::vector<double> predict(const std::vector<double>& x) const;
    Matrix input_jacobian(const std::vector<double>& x) const;
};

struct TrainResult {
    MlpModel model;
    LearningCurve curve;
    std::size_t best_epoch = 0;   // 0-based epoch of the returned checkpoint
    double best_val_loss = 0.0;   // validation MSE at that epoch
    std::size_t epochs_run = 0;
};

/// Carries the best checkpoint seen before the loss went non-finite.
struct TrainingDiverged : DivergenceError {
    TrainingDiverged(const std::string& what, std::size_t epoch, MlpModel ckpt)
        : DivergenceError(what, epoch), checkpoint(std::move(ckpt)) {}
    MlpModel checkpoint;
};

/// Seeded minibatch Adam with validation-based early stopping. Normalization
/// statistics come from the training split only; the returned model is the
/// checkpoint with the lowest validation loss (final epoch when there is no
/// validation split). Stops after `patience` epochs without improvement.
TrainResult train(const Dataset& dataset, const TrainConfig& config);

/// n i.i.d. uniform samples over the box, targets from target_fn. Components
/// are drawn in order within each point.
Dataset sample_uniform_phase_space(const std::vector<std::pair<double, double>>& bounds,
                                   std::size_t n, std::uint64_t seed,
                                   const systems::TargetFn& target_fn);

/// Feature/target pairs from one trajectory via forward differences.
Dataset dataset_from_trajectory(const systems::Trajectory& traj);

/// Concatenation over trajectories; pairs never straddle a trajectory
/// boundary. All trajectories must share M and dt.
Dataset assemble_multi_trajectory(const std::vector<systems::Trajectory>& trajectories);

} // namespace phaseflow::train
