#include <doctest.h>

#include <cmath>
#include <numeric>

#include "phaseflow/rng.hpp"
#include "phaseflow/systems.hpp"
#include "phaseflow/train.hpp"

using namespace phaseflow;
using namespace phaseflow::train;

namespace {

Dataset random_dataset(std::size_t n, std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.features.resize(n, m);
    d.targets.resize(n, m);
    for (std::size_t i = 0; i < n * m; ++i) {
        d.features.data()[i] = rng.normal();
        d.targets.data()[i] = rng.normal();
    }
    return d;
}

} // namespace

TEST_SUITE("train") {

TEST_CASE("fit_norm standardizes and round-trips") {
    const Dataset d = random_dataset(500, 3, 1);
    const NormStats stats = fit_norm(d.features, d.targets);

    // data drawn from a standard normal: stats near (0, 1)
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(stats.feature_mean[j]) < 0.2);
        CHECK(std::abs(stats.feature_std[j] - 1.0) < 0.2);
    }

    const Matrix normed = normalize(stats, d.features, DataRole::Feature);
    for (std::size_t j = 0; j < 3; ++j) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < normed.rows(); ++i) mean += normed(i, j);
        mean /= static_cast<double>(normed.rows());
        for (std::size_t i = 0; i < normed.rows(); ++i) {
            const double v = normed(i, j) - mean;
            var += v * v;
        }
        var /= static_cast<double>(normed.rows());
        CHECK(std::abs(mean) <= 1e-10);
        CHECK(std::abs(std::sqrt(var) - 1.0) <= 1e-10);
    }

    const Matrix back = denormalize(stats, normed, DataRole::Feature);
    for (std::size_t i = 0; i < back.size(); ++i)
        CHECK(std::abs(back.data()[i] - d.features.data()[i]) < 1e-12);
}

TEST_CASE("constant components are floored and flagged") {
    Dataset d = random_dataset(50, 2, 2);
    for (std::size_t i = 0; i < 50; ++i) d.features(i, 1) = 4.2;
    const NormStats stats = fit_norm(d.features, d.targets);
    CHECK(stats.feature_std[1] == 1e-12);
    CHECK(!stats.degenerate.empty());
    const Matrix normed = normalize(stats, d.features, DataRole::Feature);
    for (std::size_t i = 0; i < 50; ++i) CHECK(normed(i, 1) == 0.0);
}

TEST_CASE("split sizes and reproducibility") {
    const auto [tr, val] = split_train_val(399, 0.2, 7);
    CHECK(val.size() == 80);
    CHECK(tr.size() == 319);

    const auto [tr2, val2] = split_train_val(399, 0.2, 7);
    CHECK(val == val2);
    CHECK(tr == tr2);

    // disjoint cover
    std::vector<bool> seen(399, false);
    for (auto i : tr) seen[i] = true;
    for (auto i : val) {
        CHECK(!seen[i]);
        seen[i] = true;
    }
    CHECK(std::count(seen.begin(), seen.end(), true) == 399);

    const auto [tr0, val0] = split_train_val(100, 0.0, 1);
    CHECK(val0.empty());
    CHECK(tr0.size() == 100);

    CHECK_THROWS_AS(split_train_val(1, 0.5, 0), DataError);
    CHECK_THROWS_AS(split_train_val(10, 1.0, 0), ConfigError);
}

TEST_CASE("adam step behaviour") {
    std::vector<double> params{1.0, -2.0};
    AdamState state(2);

    std::vector<double> zero{0.0, 0.0};
    adam_step(state, params, zero, 0.1);
    CHECK(params == std::vector<double>{1.0, -2.0});

    // first step with constant gradient: bias correction gives m_hat = g,
    // v_hat = g^2, so the update is lr * g / (|g| + eps) ~ lr * sign(g)
    AdamState fresh(2);
    std::vector<double> p2{0.0, 0.0};
    std::vector<double> g{0.5, -0.25};
    adam_step(fresh, p2, g, 0.01);
    CHECK(p2[0] == doctest::Approx(-0.01 * 0.5 / (0.5 + fresh.eps)).epsilon(1e-12));
    CHECK(p2[1] == doctest::Approx(0.01 * 0.25 / (0.25 + fresh.eps)).epsilon(1e-12));

    // determinism
    AdamState s1(2), s2(2);
    std::vector<double> a{1.0, 1.0}, b{1.0, 1.0};
    adam_step(s1, a, g, 0.01);
    adam_step(s2, b, g, 0.01);
    CHECK(a == b);

    std::vector<double> bad{std::numeric_limits<double>::quiet_NaN(), 0.0};
    CHECK_THROWS_AS(adam_step(s1, a, bad, 0.01), DivergenceError);
}

TEST_CASE("teacher-student training drives the loss to the floor") {
    // Dataset generated by a network of the same architecture, so an exact
    // fit exists (normalization only reparameterizes the affine ends).
    const net::MlpParams teacher = net::MlpParams::random_init({2, 8, 8, 2},
                                                               net::Activation::Swish, 21);
    Rng rng(22);
    Dataset d;
    const std::size_t n = 256;
    d.features.resize(n, 2);
    d.targets.resize(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> x{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        const std::vector<double> y = net::forward(teacher, x);
        d.features(i, 0) = x[0];
        d.features(i, 1) = x[1];
        d.targets(i, 0) = y[0];
        d.targets(i, 1) = y[1];
    }

    TrainConfig cfg;
    cfg.layer_sizes = {2, 8, 8, 2};
    cfg.activation = net::Activation::Swish;
    cfg.learning_rate = 2e-3;
    cfg.batch_size = n; // full batch: exact gradients reach the floor
    cfg.epochs = 60000;
    cfg.val_fraction = 0.0;
    cfg.seed = 23;

    const TrainResult result = train::train(d, cfg);
    CHECK(result.curve.train_loss.back() < 1e-6);
}

TEST_CASE("training is reproducible for a fixed seed") {
    auto vdp = [](const systems::StateVector& x) { return systems::vdp_target(x, 2.0); };
    const systems::Trajectory traj = systems::generate_trajectory(vdp, {2.0, 0.0}, 0.1, 200);
    const Dataset d = dataset_from_trajectory(traj);

    TrainConfig cfg;
    cfg.layer_sizes = {2, 8, 8, 2};
    cfg.epochs = 50;
    cfg.patience = 50;
    cfg.seed = 5;

    const TrainResult a = train::train(d, cfg);
    const TrainResult b = train::train(d, cfg);
    CHECK(a.curve.train_loss == b.curve.train_loss);
    CHECK(a.curve.val_loss == b.curve.val_loss);
    CHECK(a.model.params.raw() == b.model.params.raw());
}

TEST_CASE("early stopping keeps the best checkpoint and obeys patience") {
    auto vdp = [](const systems::StateVector& x) { return systems::vdp_target(x, 2.0); };
    const systems::Trajectory traj = systems::generate_trajectory(vdp, {2.0, 0.0}, 0.1, 200);
    const Dataset d = dataset_from_trajectory(traj);

    TrainConfig cfg;
    cfg.layer_sizes = {2, 8, 8, 2};
    cfg.epochs = 400;
    cfg.patience = 0; // stop exactly one epoch after the first non-improvement
    cfg.seed = 6;

    const TrainResult result = train::train(d, cfg);
    if (result.epochs_run < cfg.epochs)
        CHECK(result.epochs_run == result.best_epoch + 2);

    // the reported best validation loss is the minimum of the series
    double min_val = 1e300;
    for (double v : result.curve.val_loss) min_val = std::min(min_val, v);
    CHECK(result.best_val_loss == doctest::Approx(min_val));
}

TEST_CASE("normalization statistics come from the training split only") {
    const Dataset d = random_dataset(100, 2, 3);
    TrainConfig cfg;
    cfg.layer_sizes = {2, 4, 2};
    cfg.epochs = 1;
    cfg.val_fraction = 0.2;
    cfg.batch_size = 16;
    cfg.seed = 9;
    const TrainResult result = train::train(d, cfg);

    const auto [tr_idx, val_idx] = split_train_val(d.size(), cfg.val_fraction, cfg.seed);
    Matrix tr_f(tr_idx.size(), 2), tr_t(tr_idx.size(), 2);
    for (std::size_t i = 0; i < tr_idx.size(); ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            tr_f(i, j) = d.features(tr_idx[i], j);
            tr_t(i, j) = d.targets(tr_idx[i], j);
        }
    const NormStats direct = fit_norm(tr_f, tr_t);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(result.model.norm.feature_mean[j] == doctest::Approx(direct.feature_mean[j]));
        CHECK(result.model.norm.feature_std[j] == doctest::Approx(direct.feature_std[j]));
    }
}

TEST_CASE("divergent training carries the last finite checkpoint") {
    auto vdp = [](const systems::StateVector& x) { return systems::vdp_target(x, 2.0); };
    const systems::Trajectory traj = systems::generate_trajectory(vdp, {2.0, 0.0}, 0.1, 120);
    const Dataset d = dataset_from_trajectory(traj);

    TrainConfig cfg;
    cfg.layer_sizes = {2, 8, 8, 2};
    cfg.activation = net::Activation::Elu; // unbounded, so products overflow
    cfg.learning_rate = 1e154;
    cfg.batch_size = 32;
    cfg.epochs = 5;
    cfg.seed = 4;

    try {
        train::train(d, cfg);
        FAIL("expected divergence");
    } catch (const TrainingDiverged& e) {
        // the checkpoint is still usable for prediction
        const std::vector<double> y = e.checkpoint.predict({1.0, 0.0});
        CHECK(std::isfinite(y[0]));
        CHECK(std::isfinite(y[1]));
    }
}

TEST_CASE("uniform phase-space sampling") {
    auto vdp = [](const systems::StateVector& x) { return systems::vdp_target(x, 2.0); };
    const std::vector<std::pair<double, double>> box{{-3.0, 3.0}, {-5.0, 5.0}};
    const Dataset d = sample_uniform_phase_space(box, 399, 17, vdp);
    CHECK(d.size() == 399);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(d.features(i, 0) >= -3.0);
        CHECK(d.features(i, 0) < 3.0);
        CHECK(d.features(i, 1) >= -5.0);
        CHECK(d.features(i, 1) < 5.0);
        // targets really come from the field
        const std::vector<double> want = vdp({d.features(i, 0), d.features(i, 1)});
        CHECK(d.targets(i, 0) == want[0]);
        CHECK(d.targets(i, 1) == want[1]);
    }
    const Dataset again = sample_uniform_phase_space(box, 399, 17, vdp);
    CHECK(d.features == again.features);

    CHECK_THROWS_AS(sample_uniform_phase_space({{1.0, 1.0}}, 5, 0,
                                               [](const systems::StateVector& x) { return x; }),
                    ConfigError);
}

TEST_CASE("multi-trajectory assembly never pairs across boundaries") {
    auto vdp = [](const systems::StateVector& x) { return systems::vdp_target(x, 2.0); };
    std::vector<systems::Trajectory> trajs;
    for (int i = 0; i < 18; ++i)
        trajs.push_back(systems::generate_trajectory(
            vdp, {0.5 + 0.1 * i, -0.3}, 0.1, 999));
    const Dataset d = assemble_multi_trajectory(trajs);
    CHECK(d.size() == 18 * 999);

    // single trajectory equals dataset_from_trajectory
    const Dataset single = assemble_multi_trajectory({trajs[0]});
    const Dataset direct = dataset_from_trajectory(trajs[0]);
    CHECK(single.features == direct.features);
    CHECK(single.targets == direct.targets);

    // duplicated trajectory duplicates rows exactly
    const Dataset twice = assemble_multi_trajectory({trajs[0], trajs[0]});
    CHECK(twice.size() == 2 * direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(twice.features(direct.size() + i, j) == direct.features(i, j));

    // mixed dt rejected
    systems::Trajectory other = trajs[0];
    other.dt = 0.2;
    CHECK_THROWS_AS(assemble_multi_trajectory({trajs[0], other}), ConfigError);
}

} // TEST_SUITE
