#include <doctest.h>

#include <cmath>

#include "phaseflow/reduction.hpp"
#include "phaseflow/rng.hpp"

using namespace phaseflow;
using namespace phaseflow::reduction;

namespace {

SnapshotMatrix random_snapshots(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    SnapshotMatrix s;
    s.data.resize(n, d);
    for (std::size_t i = 0; i < n * d; ++i) s.data.data()[i] = rng.normal();
    return s;
}

double frob(const Matrix& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) acc += m.data()[i] * m.data()[i];
    return std::sqrt(acc);
}

} // namespace

TEST_SUITE("reduction") {

TEST_CASE("rank-one snapshots give one singular value") {
    const std::size_t n = 30, d = 12;
    Rng rng(1);
    std::vector<double> shape(d), signal(n);
    for (auto& v : shape) v = rng.uniform(-1.0, 1.0);
    double mean = 0.0;
    for (auto& v : signal) {
        v = rng.uniform(-1.0, 1.0);
        mean += v;
    }
    mean /= static_cast<double>(n);
    for (auto& v : signal) v -= mean; // zero temporal mean, rank one after centering

    SnapshotMatrix snaps;
    snaps.data.resize(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) snaps.data(i, j) = signal[i] * shape[j];

    const PodResult r = pod(snaps, 1.0);
    REQUIRE(r.basis.rank() >= 1);
    for (std::size_t k = 1; k < r.basis.rank(); ++k)
        CHECK(r.basis.singular_values[k] <= 1e-10 * r.basis.singular_values[0]);
}

TEST_CASE("full-energy pod reconstructs the snapshots") {
    const SnapshotMatrix snaps = random_snapshots(25, 10, 2);
    const PodResult r = pod(snaps, 1.0);

    Matrix rec(25, 10);
    for (std::size_t i = 0; i < 25; ++i) {
        const std::vector<double> coeffs(r.coefficients.row(i),
                                         r.coefficients.row(i) + r.basis.rank());
        const std::vector<double> field = reconstruct(r.basis, coeffs);
        for (std::size_t j = 0; j < 10; ++j) rec(i, j) = field[j];
    }
    Matrix diff(25, 10);
    for (std::size_t i = 0; i < diff.size(); ++i)
        diff.data()[i] = rec.data()[i] - snaps.data.data()[i];
    CHECK(frob(diff) <= 1e-8 * frob(snaps.data));
}

TEST_CASE("projection and reconstruction are inverse on coefficients") {
    const SnapshotMatrix snaps = random_snapshots(20, 8, 3);
    const PodResult r = pod(snaps, 1.0);

    // the mean field projects to all zeros
    const std::vector<double> zero_coeffs = project(r.basis, r.basis.mean);
    for (double c : zero_coeffs) CHECK(std::abs(c) <= 1e-10);

    // project then reconstruct on a snapshot (full basis)
    std::vector<double> field(8);
    for (std::size_t j = 0; j < 8; ++j) field[j] = snaps.data(4, j);
    const std::vector<double> coeffs = project(r.basis, field);
    const std::vector<double> back = reconstruct(r.basis, coeffs);
    for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(back[j] - field[j]) <= 1e-10);

    // Parseval: total coefficient energy equals the singular-value energy
    double coeff_energy = 0.0;
    for (std::size_t i = 0; i < r.coefficients.size(); ++i)
        coeff_energy += r.coefficients.data()[i] * r.coefficients.data()[i];
    double sv_energy = 0.0;
    for (double s : r.basis.singular_values) sv_energy += s * s;
    CHECK(coeff_energy == doctest::Approx(sv_energy).epsilon(1e-10));
}

TEST_CASE("modes are orthonormal under the weighted inner product") {
    SnapshotMatrix snaps = random_snapshots(30, 9, 4);
    Rng rng(5);
    snaps.quadrature_weights.resize(9);
    for (auto& w : snaps.quadrature_weights) w = rng.uniform(0.25, 4.0);

    const PodResult r = pod(snaps, 1.0);
    for (std::size_t a = 0; a < r.basis.rank(); ++a)
        for (std::size_t b = 0; b < r.basis.rank(); ++b) {
            double ip = 0.0;
            for (std::size_t j = 0; j < 9; ++j)
                ip += snaps.quadrature_weights[j] * r.basis.modes(j, a) * r.basis.modes(j, b);
            CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) <= 1e-10);
        }
}

TEST_CASE("truncation error equals the singular-value tail") {
    const SnapshotMatrix snaps = random_snapshots(24, 16, 6);
    const PodResult full = pod(snaps, 1.0);
    const std::size_t r = 5;
    const PodResult trunc = pod_fixed(snaps, r);

    Matrix diff(24, 16);
    for (std::size_t i = 0; i < 24; ++i) {
        const std::vector<double> coeffs(trunc.coefficients.row(i),
                                         trunc.coefficients.row(i) + r);
        const std::vector<double> rec = reconstruct(trunc.basis, coeffs);
        for (std::size_t j = 0; j < 16; ++j) diff(i, j) = snaps.data(i, j) - rec[j];
    }
    double tail = 0.0;
    for (std::size_t k = r; k < full.basis.rank(); ++k)
        tail += full.basis.singular_values[k] * full.basis.singular_values[k];
    const double err2 = frob(diff) * frob(diff);
    CHECK(std::abs(err2 - tail) <= 1e-8 * std::max(1.0, tail));
}

TEST_CASE("mode signs are canonical and stable under reordering") {
    const SnapshotMatrix snaps = random_snapshots(40, 10, 7);
    const PodResult a = pod_fixed(snaps, 4);

    SnapshotMatrix reversed;
    reversed.data.resize(40, 10);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 10; ++j) reversed.data(i, j) = snaps.data(39 - i, j);
    const PodResult b = pod_fixed(reversed, 4);

    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t j = 0; j < 10; ++j)
            CHECK(a.basis.modes(j, k) == doctest::Approx(b.basis.modes(j, k)).epsilon(1e-8));
}

TEST_CASE("energy target selects the expected rank") {
    // synthetic surrogate shaped like the buoyant-mixing reduction: ten
    // strong modes carrying ~97% of the energy, a weak broadband tail
    const std::size_t n = 60, d = 40;
    Rng rng(8);
    Matrix factors(n, d, 0.0);
    SnapshotMatrix snaps;
    snaps.data.resize(n, d, 0.0);
    std::vector<double> strength(d, 0.0);
    for (std::size_t k = 0; k < 10; ++k) strength[k] = 10.0 - 0.5 * static_cast<double>(k);
    for (std::size_t k = 10; k < 25; ++k) strength[k] = 0.35;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k)
            snaps.data(i, k) = strength[k] * rng.normal();

    const PodResult r = pod(snaps, 0.97);
    CHECK(r.basis.rank() >= 8);
    CHECK(r.basis.rank() <= 13);

    CHECK_THROWS_AS(pod(snaps, 0.0), ConfigError);
    CHECK_THROWS_AS(pod(snaps, 1.5), ConfigError);
}

TEST_CASE("singular values are sorted descending") {
    const SnapshotMatrix snaps = random_snapshots(30, 12, 9);
    const PodResult r = pod(snaps, 1.0);
    for (std::size_t k = 1; k < r.basis.rank(); ++k)
        CHECK(r.basis.singular_values[k] <= r.basis.singular_values[k - 1] + 1e-14);
}

} // TEST_SUITE
