#include <doctest.h>

#include <cmath>
#include <complex>

#include "phaseflow/eval.hpp"
#include "phaseflow/rng.hpp"
#include "phaseflow/systems.hpp"
#include "phaseflow/train.hpp"

using namespace phaseflow;
using namespace phaseflow::eval;

namespace {

systems::TargetFn vdp_fn(double mu = 2.0) {
    return [mu](const systems::StateVector& x) { return systems::vdp_target(x, mu); };
}

} // namespace

TEST_SUITE("eval") {

TEST_CASE("r2 identities") {
    Rng rng(1);
    Matrix y(50, 3);
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();

    const R2Result perfect = r2_score(y, y);
    CHECK(perfect.scalar == 1.0);
    for (double v : perfect.per_component) CHECK(v == 1.0);

    // predicting the per-component mean gives exactly zero
    Matrix mean_pred(50, 3);
    for (std::size_t j = 0; j < 3; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < 50; ++i) m += y(i, j);
        m /= 50.0;
        for (std::size_t i = 0; i < 50; ++i) mean_pred(i, j) = m;
    }
    const R2Result zero = r2_score(y, mean_pred);
    CHECK(zero.scalar == doctest::Approx(0.0).epsilon(1e-14));

    // scalar is the arithmetic mean of the per-component values
    Matrix noisy = mean_pred;
    for (std::size_t i = 0; i < noisy.size(); ++i) noisy.data()[i] += 0.3 * rng.normal();
    const R2Result mixed = r2_score(y, noisy);
    double mean_r2 = 0.0;
    for (double v : mixed.per_component) mean_r2 += v;
    CHECK(mixed.scalar == doctest::Approx(mean_r2 / 3.0).epsilon(1e-14));

    // invariance under adding a constant to both sides
    Matrix y_shift = y, p_shift = noisy;
    for (std::size_t i = 0; i < 50; ++i) {
        y_shift(i, 1) += 5.0;
        p_shift(i, 1) += 5.0;
    }
    const R2Result shifted = r2_score(y_shift, p_shift);
    CHECK(shifted.scalar == doctest::Approx(mixed.scalar).epsilon(1e-12));

    // zero-variance component flagged and excluded
    Matrix flat(50, 2, 1.0);
    Matrix flat_pred(50, 2, 1.0);
    for (std::size_t i = 0; i < 50; ++i) {
        flat(i, 0) = rng.normal();
        flat_pred(i, 0) = flat(i, 0);
    }
    const R2Result warned = r2_score(flat, flat_pred);
    CHECK(warned.warnings.size() == 1);
    CHECK(warned.scalar == 1.0);
}

TEST_CASE("local errors against the exact model") {
    const CallableDynamics exact(vdp_fn(), 2);
    const systems::Trajectory traj = systems::generate_trajectory(vdp_fn(), {1.0, 0.5}, 0.1, 100);
    const systems::TargetSeries targets = systems::targets_from_function(traj, vdp_fn());
    Matrix features(traj.length(), 2);
    for (std::size_t i = 0; i < traj.length(); ++i)
        for (std::size_t j = 0; j < 2; ++j) features(i, j) = traj.states(i, j);

    const ErrorSeries zero = local_errors(exact, features, targets.targets);
    for (double e : zero.norm) CHECK(e == 0.0);

    // f == 0 gives the target norms, and the norm inequalities hold
    const CallableDynamics null_model(
        [](const systems::StateVector& x) { return systems::StateVector(x.size(), 0.0); }, 2);
    const ErrorSeries norms = local_errors(null_model, features, targets.targets);
    for (std::size_t i = 0; i < norms.norm.size(); ++i) {
        const double want = std::hypot(targets.targets(i, 0), targets.targets(i, 1));
        CHECK(norms.norm[i] == doctest::Approx(want).epsilon(1e-14));
        const double sum = norms.per_component(i, 0) + norms.per_component(i, 1);
        const double mx = std::max(norms.per_component(i, 0), norms.per_component(i, 1));
        CHECK(norms.norm[i] <= sum + 1e-14);
        CHECK(norms.norm[i] + 1e-14 >= mx);
    }
}

TEST_CASE("rollout with the exact dynamics reproduces generation") {
    const CallableDynamics exact(vdp_fn(), 2);
    const systems::Trajectory want = systems::generate_trajectory(vdp_fn(), {-1.0, -2.0}, 0.1, 599);
    const systems::Trajectory got = rollout(exact, {-1.0, -2.0}, 0.1, 599);
    const ErrorSeries g = global_errors(want, got);
    CHECK(g.norm[0] == 0.0);
    for (double e : g.norm) CHECK(e <= 1e-9);

    // single step and constant-model cases
    const systems::Trajectory one = rollout(exact, {1.0, 1.0}, 0.1, 1);
    CHECK(one.length() == 2);
    const CallableDynamics null_model(
        [](const systems::StateVector& x) { return systems::StateVector(x.size(), 0.0); }, 2);
    const systems::Trajectory frozen = rollout(null_model, {0.3, -0.4}, 0.1, 10);
    for (std::size_t i = 0; i < frozen.length(); ++i) {
        CHECK(frozen.states(i, 0) == 0.3);
        CHECK(frozen.states(i, 1) == -0.4);
    }
}

TEST_CASE("rollout divergence keeps the partial trajectory") {
    const CallableDynamics blowup(
        [](const systems::StateVector& x) { return systems::StateVector{x[0] * x[0]}; }, 1);
    try {
        rollout(blowup, {10.0}, 1.0, 50);
        FAIL("expected divergence");
    } catch (const RolloutDiverged& e) {
        CHECK(e.step >= 1);
        CHECK(e.partial.length() == e.step + 1);
    }
}

TEST_CASE("error propagation chain on a perturbed model") {
    // model with a slightly wrong parameter; the truth is mu = 2
    const CallableDynamics model(vdp_fn(2.02), 2);
    const double dt = 0.1;
    const systems::Trajectory truth = systems::generate_trajectory(vdp_fn(), {1.5, 0.0}, dt, 120);
    const systems::Trajectory pred = rollout(model, {1.5, 0.0}, dt, 120);
    const ErrorSeries global = global_errors(truth, pred);

    // second derivatives of the vdp field are bounded on the orbit region
    const double hessian_bound = 40.0;
    for (std::size_t i = 0; i + 1 < global.norm.size(); ++i) {
        std::vector<double> xhat{pred.states(i, 0), pred.states(i, 1)};
        const std::vector<double> f_true = vdp_fn()(xhat);
        const std::vector<double> f_model = model.predict(xhat);
        const double local =
            std::hypot(f_true[0] - f_model[0], f_true[1] - f_model[1]);

        // Frobenius norm of the map Jacobian I + dt J evaluated at xhat
        const Matrix jac = model.jacobian(xhat);
        double fro = 0.0;
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c) {
                const double entry = (r == c ? 1.0 : 0.0) + dt * jac(r, c);
                fro += entry * entry;
            }
        fro = std::sqrt(fro);

        const double quadratic = 0.5 * dt * hessian_bound * global.norm[i] * global.norm[i];
        CHECK(global.norm[i + 1] <=
              dt * local + fro * global.norm[i] + 10.0 * quadratic + 1e-12);
    }
}

TEST_CASE("stepwise grid") {
    const CallableDynamics exact(vdp_fn(), 2);
    const StepwiseGrid zero =
        stepwise_error_grid(exact, vdp_fn(), {-3.0, 3.0}, {-5.0, 5.0}, 11);
    CHECK(zero.error.size() == 121);
    for (double e : zero.error) CHECK(e <= 1e-12);

    const CallableDynamics null_model(
        [](const systems::StateVector& x) { return systems::StateVector(x.size(), 0.0); }, 2);
    const StepwiseGrid norms =
        stepwise_error_grid(null_model, vdp_fn(), {-3.0, 3.0}, {-5.0, 5.0}, 11);
    for (std::size_t i = 0; i < norms.error.size(); ++i)
        CHECK(norms.error[i] ==
              doctest::Approx(std::hypot(norms.truth_dx[i], norms.truth_dy[i])).epsilon(1e-14));

    CHECK_THROWS_AS(stepwise_error_grid(exact, vdp_fn(), {-3.0, 3.0}, {-5.0, 5.0}, 1),
                    ConfigError);
    CHECK_THROWS_AS(stepwise_error_grid(exact, vdp_fn(), {3.0, -3.0}, {-5.0, 5.0}, 11),
                    ConfigError);
}

TEST_CASE("stepwise errors at arbitrary points match the grid values") {
    const CallableDynamics null_model(
        [](const systems::StateVector& x) { return systems::StateVector(x.size(), 0.0); }, 2);
    Matrix pts(3, 2);
    pts(0, 0) = 1.0;
    pts(0, 1) = 2.0;
    pts(1, 0) = -0.5;
    pts(1, 1) = 0.25;
    pts(2, 0) = 2.0;
    pts(2, 1) = -4.0;
    const std::vector<double> errs = stepwise_errors(null_model, vdp_fn(), pts);
    for (std::size_t i = 0; i < 3; ++i) {
        const std::vector<double> f = vdp_fn()({pts(i, 0), pts(i, 1)});
        CHECK(errs[i] == doctest::Approx(std::hypot(f[0], f[1])).epsilon(1e-14));
    }
}

TEST_CASE("jacobian diagnostics on a linear map") {
    // f(x) = diag(a, b) x
    const double a = -1.5, b = 0.75;
    const CallableDynamics model(
        [a, b](const systems::StateVector& x) {
            return systems::StateVector{a * x[0], b * x[1]};
        },
        2);
    Matrix points(3, 2);
    points(0, 0) = 0.1;
    points(1, 1) = -0.2;
    points(2, 0) = 1.0;
    const JacobianDiagnostics diag = jacobian_diagnostics(model, points, 0.1);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(diag.max_singular_value[i] == doctest::Approx(1.5).epsilon(1e-6));
        double max_eig = 0.0;
        for (const auto& ev : diag.eigenvalues[i]) max_eig = std::max(max_eig, std::abs(ev));
        CHECK(max_eig == doctest::Approx(1.5).epsilon(1e-6));
        // norm ordering: ||J||_F >= sigma_max >= max |eig|
        CHECK(diag.frobenius_norm[i] + 1e-9 >= diag.max_singular_value[i]);
        CHECK(diag.max_singular_value[i] + 1e-9 >= max_eig);
    }
}

TEST_CASE("complex eigenvalues come in conjugate pairs") {
    // rotation-like field: f = (-x2, x1), eigenvalues +-i
    const CallableDynamics rot(
        [](const systems::StateVector& x) { return systems::StateVector{-x[1], x[0]}; }, 2);
    Matrix pt(1, 2);
    pt(0, 0) = 0.3;
    pt(0, 1) = 0.4;
    const JacobianDiagnostics diag = jacobian_diagnostics(rot, pt, 0.05);
    REQUIRE(diag.eigenvalues[0].size() == 2);
    const auto e0 = diag.eigenvalues[0][0];
    const auto e1 = diag.eigenvalues[0][1];
    CHECK(std::abs(e0.real() - e1.real()) <= 1e-10);
    CHECK(std::abs(e0.imag() + e1.imag()) <= 1e-10);
    CHECK(std::abs(std::abs(e0.imag()) - 1.0) <= 1e-6);
}

TEST_CASE("rk5 stability boundary") {
    const auto boundary = rk5_stability_boundary(720);
    CHECK(boundary.size() == 720);

    auto poly_mag = [](std::complex<double> z) {
        std::complex<double> p{1.0, 0.0}, zk{1.0, 0.0};
        double fact = 1.0;
        for (int k = 1; k <= 5; ++k) {
            zk *= z;
            fact *= k;
            p += zk / fact;
        }
        return std::abs(p);
    };
    for (const auto& z : boundary)
        if (std::abs(z) > 1e-12) CHECK(poly_mag(z) == doctest::Approx(1.0).epsilon(1e-6));

    // the negative real axis extent of the degree-5 region is about -3.21
    const auto left = boundary[720 / 2];
    CHECK(left.real() == doctest::Approx(-3.217).epsilon(0.02));
    CHECK(std::abs(left.imag()) <= 1e-9);

    // the right half axis is outside the region immediately
    CHECK(std::abs(boundary[0]) <= 1e-9);
}

TEST_CASE("pearson correlation basics") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y{3, 5, 7, 9, 11};
    CHECK(pearson_correlation(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> z{5, 4, 3, 2, 1};
    CHECK(pearson_correlation(x, z) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("finite-difference jacobian fallback is accurate") {
    const CallableDynamics model(vdp_fn(), 2);
    const std::vector<double> x{1.2, -0.7};
    const Matrix jac = model.jacobian(x); // FD fallback
    // analytic: [[0, 1], [-2 mu x1 x2 - 1, mu (1 - x1^2)]]
    CHECK(jac(0, 0) == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(jac(0, 1) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(jac(1, 0) == doctest::Approx(-2.0 * 2.0 * 1.2 * -0.7 - 1.0).epsilon(1e-6));
    CHECK(jac(1, 1) == doctest::Approx(2.0 * (1.0 - 1.44)).epsilon(1e-6));
}

} // TEST_SUITE
