#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "phaseflow/common.hpp"
#include "phaseflow/systems.hpp"

namespace phaseflow::spectral {

using GridField = std::vector<double>;

/// Radix-2 complex FFT for one fixed power-of-two size. Twiddles and the
/// bit-reversal permutation are precomputed at construction.
class Fft {
public:
    explicit Fft(std::size_t n);

    std::size_t size() const { return n_; }

    /// In-place transform; inverse applies the 1/n scaling.
    void forward(std::complex<double>* data) const;
    void inverse(std::complex<double>* data) const;

private:
    void transform(std::complex<double>* data, bool inverse) const;

    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<std::complex<double>> twiddle_; // exp(-2*pi*i*j/n), j < n/2
};

/// Random-phase initial condition
///   u(x,0) = sum_{k=1}^{k_c} (1/pi) sqrt(2 A E(k)) sin(k x + beta_k),
/// beta_k ~ Uniform[-pi, pi) drawn in k order from the seed.
struct SpectrumConfig {
    std::size_t k_c = 2;
    double amplitude = 25.0; // A
    std::uint64_t seed = 0;
};

/// E(k): 5^{-5/3} for k <= 5, k^{-5/3} beyond.
double spectrum_energy(std::size_t k);

GridField spectrum_ic(const SpectrumConfig& cfg, std::size_t n_grid);

/// Same field with explicit phases; the seeded overload draws beta and
/// delegates here.
GridField spectrum_ic_from_phases(const std::vector<double>& betas, double amplitude,
                                  std::size_t n_grid);

/// Viscous Burgers right-hand side and SSP-RK3 stepper on [0, 2*pi) with
/// spectral derivatives. One instance owns the FFT plan and work buffers for
/// a fixed grid size.
class BurgersSolver {
public:
    BurgersSolver(std::size_t n_grid, double nu, bool dealias = false, bool advection = true);

    std::size_t grid_size() const { return n_; }
    double nu() const { return nu_; }

    /// -u u_x + nu u_xx (advection term optional for the diffusion-only checks).
    void rhs(const GridField& u, GridField& out);
    GridField rhs(const GridField& u);

    /// Shu-Osher form:
    ///   u1 = u + dt L(u)
    ///   u2 = 3/4 u + 1/4 (u1 + dt L(u1))
    ///   u+ = 1/3 u + 2/3 (u2 + dt L(u2))
    void step(GridField& u, double dt);

    /// Largest linearly stable step for this grid given the initial field,
    /// capped at dt_max. Explicit diffusion restricts dt to
    /// ~2.5/(nu k_max^2); advection to ~sqrt(3)/(k_max max|u|).
    double stable_dt(const GridField& u0, double dt_max) const;

private:
    void derivatives(const GridField& u, GridField& ux, GridField& uxx);

    std::size_t n_;
    double nu_;
    bool dealias_;
    bool advection_;
    Fft fft_;
    std::vector<std::complex<double>> spec_, packed_;
    GridField ux_, uxx_, k1_, k2_, k3_;
};

/// Convenience wrappers for single evaluations (tests, small scripts).
GridField burgers_rhs(const GridField& u, double nu);
GridField ssp_rk3_step(const GridField& u, double dt, double nu);

struct DctCoeffs {
    std::vector<double> coeffs;
};

/// Orthonormal type-II DCT analysis truncated to the first n_modes
/// coefficients.
DctCoeffs dct_reduce(const GridField& u, std::size_t n_modes);

/// Zero-padded synthesis back to the grid.
GridField dct_expand(const DctCoeffs& a, std::size_t n_grid);

/// sum_{i<n_modes} a_i^2 / sum_j u_j^2; the denominator uses Parseval
/// instead of a full transform.
double dct_energy_fraction(const GridField& u, std::size_t n_modes);

struct BurgersRunConfig {
    std::size_t n_grid = 2048;
    double nu = 0.01;
    double t_end = 20.0;
    std::size_t snapshots = 1000;
    std::size_t n_modes = 4;
    double dt_max = 1e-3;
    bool dealias = false;
};

struct BurgersRunStats {
    double energy_initial = 0.0;    // sum u^2 * dx at t = 0
    double energy_final = 0.0;      // same at t_end
    double mean_mode_energy_fraction = 0.0; // time-averaged n_modes DCT fraction
    double dt = 0.0;                // actual DNS step
    std::size_t steps = 0;
};

/// Runs the DNS from the seeded spectrum IC, recording the first n_modes DCT
/// coefficients at `snapshots` equally spaced times over [0, t_end] (endpoints
/// included). The optional field sink receives every full snapshot.
systems::Trajectory run_reduced_dns(const SpectrumConfig& cfg, const BurgersRunConfig& run,
                                    BurgersRunStats* stats = nullptr,
                                    std::vector<GridField>* full_fields = nullptr);

/// Independent DNS runs with seeds cfg.seed, cfg.seed + 1, ... Parallel across
/// trajectories up to `threads` (0 means one per hardware thread, capped by
/// PHASEFLOW_THREADS).
std::vector<systems::Trajectory> generate_burgers_ensemble(std::size_t n_traj,
                                                           const SpectrumConfig& cfg,
                                                           const BurgersRunConfig& run,
                                                           std::size_t threads = 0);

} // namespace phaseflow::spectral
