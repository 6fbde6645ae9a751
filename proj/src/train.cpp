#include "phaseflow/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "phaseflow/eval.hpp"
#include "phaseflow/rng.hpp"

namespace phaseflow::train {

namespace {
constexpr double kStdFloor = 1e-12;
} // namespace

NormStats fit_norm(const Matrix& features, const Matrix& targets) {
    if (features.rows() < 2) throw DataError("fit_norm: need at least 2 samples");
    if (features.rows() != targets.rows())
        throw ShapeError("fit_norm: feature/target row mismatch");

    NormStats stats;
    auto fit = [&](const Matrix& data, std::vector<double>& mean, std::vector<double>& std_dev,
                   const char* role) {
        const std::size_t n = data.rows(), m = data.cols();
        mean.assign(m, 0.0);
        std_dev.assign(m, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) mean[j] += data(i, j);
        for (std::size_t j = 0; j < m; ++j) mean[j] /= static_cast<double>(n);
        // Compensated pass: re-center on the residual mean so an exactly
        // constant column yields exactly zero residuals.
        std::vector<double> correction(m, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) correction[j] += data(i, j) - mean[j];
        for (std::size_t j = 0; j < m; ++j) mean[j] += correction[j] / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const double d = data(i, j) - mean[j];
                std_dev[j] += d * d;
            }
        for (std::size_t j = 0; j < m; ++j) {
            std_dev[j] = std::sqrt(std_dev[j] / static_cast<double>(n));
            if (std_dev[j] < kStdFloor) {
                std_dev[j] = kStdFloor;
                stats.degenerate.push_back(std::string(role) + " component " +
                                           std::to_string(j + 1) + " has zero variance");
            }
        }
    };
    fit(features, stats.feature_mean, stats.feature_std, "feature");
    fit(targets, stats.target_mean, stats.target_std, "target");
    return stats;
}

namespace {

Matrix apply_norm(const std::vector<double>& mean, const std::vector<double>& std_dev,
                  const Matrix& data, bool forward) {
    if (data.cols() != mean.size()) throw ShapeError("normalize: dimension mismatch");
    Matrix out(data.rows(), data.cols());
    for (std::size_t i = 0; i < data.rows(); ++i)
        for (std::size_t j = 0; j < data.cols(); ++j)
            out(i, j) = forward ? (data(i, j) - mean[j]) / std_dev[j]
                                : mean[j] + std_dev[j] * data(i, j);
    return out;
}

} // namespace

Matrix normalize(const NormStats& stats, const Matrix& data, DataRole role) {
    return role == DataRole::Feature ? apply_norm(stats.feature_mean, stats.feature_std, data, true)
                                     : apply_norm(stats.target_mean, stats.target_std, data, true);
}

Matrix denormalize(const NormStats& stats, const Matrix& data, DataRole role) {
    return role == DataRole::Feature
               ? apply_norm(stats.feature_mean, stats.feature_std, data, false)
               : apply_norm(stats.target_mean, stats.target_std, data, false);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_train_val(std::size_t n, double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction >= 1.0)
        throw ConfigError("split_train_val: fraction must be in [0, 1)");
    if (fraction > 0.0 && n < 2)
        throw DataError("split_train_val: need at least 2 samples to split");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::size_t val_count = 0;
    if (fraction > 0.0) {
        val_count = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(n)));
        val_count = std::max<std::size_t>(1, std::min(val_count, n - 1));
        Rng rng(seed);
        rng.shuffle(idx);
    }
    std::vector<std::size_t> val(idx.begin(), idx.begin() + val_count);
    std::vector<std::size_t> tr(idx.begin() + val_count, idx.end());
    std::sort(val.begin(), val.end());
    std::sort(tr.begin(), tr.end());
    return {tr, val};
}

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grads,
               double learning_rate) {
    if (params.size() != grads.size() || state.m.size() != params.size())
        throw ShapeError("adam_step: shape mismatch");
    if (!all_finite(grads)) throw DivergenceError("adam_step: non-finite gradients", state.t);

    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

std::vector<double> MlpModel::predict(const std::vector<double>& x) const {
    if (x.size() != params.input_dim()) throw ShapeError("MlpModel::predict: dimension mismatch");
    std::vector<double> xn(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        xn[j] = (x[j] - norm.feature_mean[j]) / norm.feature_std[j];
    std::vector<double> yn = net::forward(params, xn);
    for (std::size_t j = 0; j < yn.size(); ++j)
        yn[j] = norm.target_mean[j] + norm.target_std[j] * yn[j];
    return yn;
}

Matrix MlpModel::input_jacobian(const std::vector<double>& x) const {
    std::vector<double> xn(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        xn[j] = (x[j] - norm.feature_mean[j]) / norm.feature_std[j];
    Matrix jn = net::input_jacobian(params, xn);
    // Chain rule through the affine wrappers: diag(t_std) J diag(1/f_std).
    for (std::size_t r = 0; r < jn.rows(); ++r)
        for (std::size_t c = 0; c < jn.cols(); ++c)
            jn(r, c) *= norm.target_std[r] / norm.feature_std[c];
    return jn;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
    if (config.layer_sizes.size() < 2) throw ConfigError("train: layer_sizes too short");
    if (config.layer_sizes.front() != dataset.dim() ||
        config.layer_sizes.back() != dataset.targets.cols())
        throw ShapeError("train: network width must match the state dimension");
    if (config.learning_rate <= 0.0) throw ConfigError("train: learning_rate must be positive");
    if (config.epochs < 1) throw ConfigError("train: epochs must be at least 1");
    if (config.batch_size < 1) throw ConfigError("train: batch_size must be at least 1");

    auto [train_idx, val_idx] = split_train_val(dataset.size(), config.val_fraction, config.seed);
    if (train_idx.size() < config.batch_size)
        throw ConfigError("train: fewer training samples than one batch after the split");

    auto gather = [&](const std::vector<std::size_t>& idx, const Matrix& src) {
        Matrix out(idx.size(), src.cols());
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < src.cols(); ++j) out(i, j) = src(idx[i], j);
        return out;
    };
    const Matrix train_features_raw = gather(train_idx, dataset.features);
    const Matrix train_targets_raw = gather(train_idx, dataset.targets);

    // No leakage: statistics from the training split only.
    NormStats stats = fit_norm(train_features_raw, train_targets_raw);
    const Matrix train_x = normalize(stats, train_features_raw, DataRole::Feature);
    const Matrix train_y = normalize(stats, train_targets_raw, DataRole::Target);

    net::Batch val_batch;
    const bool has_val = !val_idx.empty();
    if (has_val) {
        val_batch.features = normalize(stats, gather(val_idx, dataset.features), DataRole::Feature);
        val_batch.targets = normalize(stats, gather(val_idx, dataset.targets), DataRole::Target);
    }

    net::MlpParams params = net::MlpParams::random_init(config.layer_sizes, config.activation,
                                                        config.seed, config.ptanh_slope);
    AdamState adam(params.parameter_count());
    Rng shuffle_rng(config.seed + 1);

    const std::size_t n_train = train_idx.size();
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    net::MlpWorkspace ws;
    net::Batch batch;
    std::vector<double> grads;

    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    net::MlpParams best_params = params;
    std::size_t best_epoch = 0;
    double best_tracked = std::numeric_limits<double>::infinity();

    auto make_model = [&](const net::MlpParams& p) {
        MlpModel m;
        m.params = p;
        m.norm = stats;
        m.lambda = config.lambda;
        return m;
    };

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::size_t epoch = 0;
    try {
        for (; epoch < config.epochs; ++epoch) {
            shuffle_rng.shuffle(order);
            double loss_sum = 0.0;
            for (std::size_t start = 0; start < n_train; start += config.batch_size) {
                const std::size_t count = std::min(config.batch_size, n_train - start);
                batch.features.resize(count, dataset.dim());
                batch.targets.resize(count, dataset.targets.cols());
                for (std::size_t i = 0; i < count; ++i) {
                    const std::size_t row = order[start + i];
                    std::copy(train_x.row(row), train_x.row(row) + train_x.cols(),
                              batch.features.row(i));
                    std::copy(train_y.row(row), train_y.row(row) + train_y.cols(),
                              batch.targets.row(i));
                }
                const double loss =
                    net::loss_and_gradients(params, batch, config.lambda, grads, ws);
                loss_sum += loss * static_cast<double>(count);
                adam_step(adam, params.raw(), grads, config.learning_rate);
            }
            result.curve.train_loss.push_back(loss_sum / static_cast<double>(n_train));

            if (has_val) {
                Matrix val_pred;
                net::forward_batch(params, val_batch.features, val_pred, ws);
                double se = 0.0;
                for (std::size_t j = 0; j < val_pred.size(); ++j) {
                    const double r = val_pred.data()[j] - val_batch.targets.data()[j];
                    se += r * r;
                }
                const double val_loss = se / static_cast<double>(val_batch.features.rows());
                if (!std::isfinite(val_loss))
                    throw DivergenceError("train: validation loss non-finite", epoch);
                result.curve.val_loss.push_back(val_loss);
                result.curve.val_r2.push_back(
                    eval::r2_score(val_batch.targets, val_pred).scalar);
                if (val_loss < best_tracked) {
                    best_tracked = val_loss;
                    best_params = params;
                    best_epoch = epoch;
                }
                // Patience: allow this many non-improving epochs before stopping.
                if (epoch - best_epoch > config.patience) {
                    ++epoch;
                    break;
                }
            } else {
                result.curve.val_loss.push_back(nan);
                result.curve.val_r2.push_back(nan);
                best_params = params;
                best_epoch = epoch;
                best_tracked = result.curve.train_loss.back();
            }
        }
    } catch (const DivergenceError& e) {
        throw TrainingDiverged(std::string("train: diverged (") + e.what() + ")", epoch,
                               make_model(best_params));
    }

    result.model = make_model(best_params);
    result.best_epoch = best_epoch;
    result.best_val_loss = best_tracked;
    result.epochs_run = epoch;
    return result;
}

Dataset sample_uniform_phase_space(const std::vector<std::pair<double, double>>& bounds,
                                   std::size_t n, std::uint64_t seed,
                                   const systems::TargetFn& target_fn) {
    if (n < 1) throw ConfigError("sample_uniform_phase_space: n must be at least 1");
    for (const auto& [lo, hi] : bounds)
        if (!(lo < hi)) throw ConfigError("sample_uniform_phase_space: empty interval");
    const std::size_t m = bounds.size();

    Rng rng(seed);
    Dataset out;
    out.features.resize(n, m);
    std::vector<double> x(m);
    std::vector<std::vector<double>> targets(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            x[j] = rng.uniform(bounds[j].first, bounds[j].second);
            out.features(i, j) = x[j];
        }
        targets[i] = target_fn(x);
        if (targets[i].size() != m)
            throw ShapeError("sample_uniform_phase_space: target dimension mismatch");
    }
    out.targets.resize(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out.targets(i, j) = targets[i][j];
    return out;
}

Dataset dataset_from_trajectory(const systems::Trajectory& traj) {
    const systems::TargetSeries series = systems::targets_from_trajectory(traj);
    Dataset out;
    const std::size_t pairs = series.targets.rows();
    out.features.resize(pairs, traj.dim());
    for (std::size_t i = 0; i < pairs; ++i)
        std::copy(traj.states.row(i), traj.states.row(i) + traj.dim(), out.features.row(i));
    out.targets = series.targets;
    return out;
}

Dataset assemble_multi_trajectory(const std::vector<systems::Trajectory>& trajectories) {
    if (trajectories.empty()) throw ConfigError("assemble_multi_trajectory: no trajectories");
    const std::size_t m = trajectories.front().dim();
    const double dt = trajectories.front().dt;
    std::size_t total = 0;
    for (const auto& t : trajectories) {
        if (t.dim() != m) throw ConfigError("assemble_multi_trajectory: mixed state dimensions");
        if (t.dt != dt) throw ConfigError("assemble_multi_trajectory: mixed time steps");
        if (t.length() < 2) throw DataError("assemble_multi_trajectory: trajectory too short");
        total += t.length() - 1;
    }
    Dataset out;
    out.features.resize(total, m);
    out.targets.resize(total, m);
    std::size_t row = 0;
    for (const auto& t : trajectories) {
        const Dataset d = dataset_from_trajectory(t);
        for (std::size_t i = 0; i < d.size(); ++i, ++row) {
            std::copy(d.features.row(i), d.features.row(i) + m, out.features.row(row));
            std::copy(d.targets.row(i), d.targets.row(i) + m, out.targets.row(row));
        }
    }
    return out;
}

} // namespace phaseflow::train
