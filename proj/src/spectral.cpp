#include "phaseflow/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include "phaseflow/rng.hpp"

namespace phaseflow::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t thread_cap(std::size_t requested) {
    std::size_t n = requested;
    if (n == 0) {
        n = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("PHASEFLOW_THREADS")) {
            const long cap = std::strtol(env, nullptr, 10);
            if (cap > 0) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
        }
    }
    return std::max<std::size_t>(1, n);
}

} // namespace

Fft::Fft(std::size_t n) : n_(n) {
    if (!is_pow2(n) || n < 2) throw ConfigError("Fft: size must be a power of two >= 2");
    bitrev_.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b)
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
        bitrev_[i] = r;
    }
    twiddle_.resize(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
        const double ang = -2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
        twiddle_[j] = {std::cos(ang), std::sin(ang)};
    }
}

void Fft::transform(std::complex<double>* data, bool inverse) const {
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t j = bitrev_[i];
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t j = 0; j < half; ++j) {
                std::complex<double> w = twiddle_[j * stride];
                if (inverse) w = std::conj(w);
                std::complex<double>& a = data[start + j];
                std::complex<double>& b = data[start + j + half];
                const std::complex<double> t = w * b;
                b = a - t;
                a += t;
            }
        }
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) data[i] *= scale;
    }
}

void Fft::forward(std::complex<double>* data) const { transform(data, false); }
void Fft::inverse(std::complex<double>* data) const { transform(data, true); }

double spectrum_energy(std::size_t k) {
    return k <= 5 ? std::pow(5.0, -5.0 / 3.0)
                  : std::pow(static_cast<double>(k), -5.0 / 3.0);
}

GridField spectrum_ic_from_phases(const std::vector<double>& betas, double amplitude,
                                  std::size_t n_grid) {
    if (!is_pow2(n_grid) || n_grid < 8)
        throw ConfigError("spectrum_ic: n_grid must be a power of two >= 8");
    if (amplitude <= 0.0) throw ConfigError("spectrum_ic: amplitude must be positive");
    if (betas.size() > n_grid / 2)
        throw ConfigError("spectrum_ic: k_c exceeds n_grid/2, modes would alias");

    GridField u(n_grid, 0.0);
    for (std::size_t k = 1; k <= betas.size(); ++k) {
        const double c = (1.0 / kPi) * std::sqrt(2.0 * amplitude * spectrum_energy(k));
        const double beta = betas[k - 1];
        for (std::size_t j = 0; j < n_grid; ++j) {
            const double x = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n_grid);
            u[j] += c * std::sin(static_cast<double>(k) * x + beta);
        }
    }
    return u;
}

GridField spectrum_ic(const SpectrumConfig& cfg, std::size_t n_grid) {
    if (cfg.k_c < 1) throw ConfigError("spectrum_ic: k_c must be at least 1");
    Rng rng(cfg.seed);
    std::vector<double> betas(cfg.k_c);
    for (auto& b : betas) b = rng.uniform(-kPi, kPi);
    return spectrum_ic_from_phases(betas, cfg.amplitude, n_grid);
}

BurgersSolver::BurgersSolver(std::size_t n_grid, double nu, bool dealias, bool advection)
    : n_(n_grid),
      nu_(nu),
      dealias_(dealias),
      advection_(advection),
      fft_(n_grid),
      spec_(n_grid),
      packed_(n_grid),
      ux_(n_grid),
      uxx_(n_grid),
      k1_(n_grid),
      k2_(n_grid),
      k3_(n_grid) {
    if (nu < 0.0) throw ConfigError("BurgersSolver: nu must be non-negative");
}

void BurgersSolver::derivatives(const GridField& u, GridField& ux, GridField& uxx) {
    for (std::size_t j = 0; j < n_; ++j) spec_[j] = {u[j], 0.0};
    fft_.forward(spec_.data());

    // Pack (i k u_hat) + i (-k^2 u_hat): one inverse transform yields both
    // derivatives as real and imaginary parts. The Nyquist mode of the first
    // derivative is zeroed so its spectrum stays conjugate-symmetric.
    const std::size_t half = n_ / 2;
    for (std::size_t j = 0; j < n_; ++j) {
        const double k = j <= half ? static_cast<double>(j)
                                   : static_cast<double>(j) - static_cast<double>(n_);
        const std::complex<double> uh = spec_[j];
        std::complex<double> d1 = std::complex<double>(0.0, k) * uh;
        if (j == half) d1 = 0.0;
        const std::complex<double> d2 = -k * k * uh;
        packed_[j] = d1 + std::complex<double>(0.0, 1.0) * d2;
    }
    fft_.inverse(packed_.data());
    for (std::size_t j = 0; j < n_; ++j) {
        ux[j] = packed_[j].real();
        uxx[j] = packed_[j].imag();
    }
}

void BurgersSolver::rhs(const GridField& u, GridField& out) {
    if (u.size() != n_) throw ShapeError("BurgersSolver: field size mismatch");
    derivatives(u, ux_, uxx_);
    out.resize(n_);
    if (advection_) {
        for (std::size_t j = 0; j < n_; ++j) out[j] = -u[j] * ux_[j] + nu_ * uxx_[j];
    } else {
        for (std::size_t j = 0; j < n_; ++j) out[j] = nu_ * uxx_[j];
    }
    if (dealias_ && advection_) {
        // 2/3 rule applied to the quadratic term's spectrum.
        for (std::size_t j = 0; j < n_; ++j) spec_[j] = {out[j], 0.0};
        fft_.forward(spec_.data());
        const std::size_t half = n_ / 2;
        const double cut = 2.0 * static_cast<double>(half) / 3.0;
        for (std::size_t j = 0; j < n_; ++j) {
            const double k = j <= half ? static_cast<double>(j)
                                       : static_cast<double>(j) - static_cast<double>(n_);
            if (std::abs(k) > cut) spec_[j] = 0.0;
        }
        fft_.inverse(spec_.data());
        for (std::size_t j = 0; j < n_; ++j) out[j] = spec_[j].real();
    }
}

GridField BurgersSolver::rhs(const GridField& u) {
    GridField out;
    rhs(u, out);
    return out;
}

void BurgersSolver::step(GridField& u, double dt) {
    if (dt <= 0.0) throw ConfigError("BurgersSolver::step: dt must be positive");
    rhs(u, k1_);
    for (std::size_t j = 0; j < n_; ++j) k1_[j] = u[j] + dt * k1_[j]; // u1
    rhs(k1_, k2_);
    for (std::size_t j = 0; j < n_; ++j)
        k2_[j] = 0.75 * u[j] + 0.25 * (k1_[j] + dt * k2_[j]); // u2
    rhs(k2_, k3_);
    for (std::size_t j = 0; j < n_; ++j)
        u[j] = u[j] / 3.0 + (2.0 / 3.0) * (k2_[j] + dt * k3_[j]);
}

double BurgersSolver::stable_dt(const GridField& u0, double dt_max) const {
    const double kmax = static_cast<double>(n_ / 2);
    double dt = dt_max;
    if (nu_ > 0.0) dt = std::min(dt, 0.8 * 2.5 / (nu_ * kmax * kmax));
    double umax = 0.0;
    for (double v : u0) umax = std::max(umax, std::abs(v));
    if (advection_ && umax > 0.0) dt = std::min(dt, 0.8 * std::sqrt(3.0) / (kmax * umax));
    return dt;
}

GridField burgers_rhs(const GridField& u, double nu) {
    BurgersSolver solver(u.size(), nu);
    return solver.rhs(u);
}

GridField ssp_rk3_step(const GridField& u, double dt, double nu) {
    BurgersSolver solver(u.size(), nu);
    GridField out = u;
    solver.step(out, dt);
    return out;
}

DctCoeffs dct_reduce(const GridField& u, std::size_t n_modes) {
    const std::size_t n = u.size();
    if (n_modes < 1 || n_modes > n)
        throw ShapeError("dct_reduce: need 1 <= n_modes <= n_grid");
    DctCoeffs out;
    out.coeffs.resize(n_modes);
    for (std::size_t m = 0; m < n_modes; ++m) {
        const double scale = m == 0 ? std::sqrt(1.0 / static_cast<double>(n))
                                    : std::sqrt(2.0 / static_cast<double>(n));
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            acc += u[j] * std::cos(kPi * (static_cast<double>(j) + 0.5) *
                                   static_cast<double>(m) / static_cast<double>(n));
        out.coeffs[m] = scale * acc;
    }
    return out;
}

GridField dct_expand(const DctCoeffs& a, std::size_t n_grid) {
    const std::size_t m_count = a.coeffs.size();
    if (m_count < 1 || m_count > n_grid)
        throw ShapeError("dct_expand: need 1 <= n_modes <= n_grid");
    GridField u(n_grid, 0.0);
    for (std::size_t m = 0; m < m_count; ++m) {
        const double scale = m == 0 ? std::sqrt(1.0 / static_cast<double>(n_grid))
                                    : std::sqrt(2.0 / static_cast<double>(n_grid));
        const double am = a.coeffs[m] * scale;
        if (am == 0.0) continue;
        for (std::size_t j = 0; j < n_grid; ++j)
            u[j] += am * std::cos(kPi * (static_cast<double>(j) + 0.5) *
                                  static_cast<double>(m) / static_cast<double>(n_grid));
    }
    return u;
}

double dct_energy_fraction(const GridField& u, std::size_t n_modes) {
    const DctCoeffs a = dct_reduce(u, n_modes);
    double retained = 0.0;
    for (double c : a.coeffs) retained += c * c;
    double total = 0.0;
    for (double v : u) total += v * v; // Parseval: equals the full coefficient energy
    return total > 0.0 ? retained / total : 0.0;
}

systems::Trajectory run_reduced_dns(const SpectrumConfig& cfg, const BurgersRunConfig& run,
                                    BurgersRunStats* stats, std::vector<GridField>* full_fields) {
    if (run.snapshots < 2) throw ConfigError("run_reduced_dns: need at least 2 snapshots");
    if (run.t_end <= 0.0) throw ConfigError("run_reduced_dns: t_end must be positive");
    if (run.n_modes < 1 || run.n_modes > run.n_grid)
        throw ConfigError("run_reduced_dns: invalid n_modes");

    GridField u = spectrum_ic(cfg, run.n_grid);
    BurgersSolver solver(run.n_grid, run.nu, run.dealias);

    const double snap_dt = run.t_end / static_cast<double>(run.snapshots - 1);
    const double dt_target = solver.stable_dt(u, run.dt_max);
    const std::size_t substeps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(snap_dt / dt_target)));
    const double dt = snap_dt / static_cast<double>(substeps);

    const double dx = 2.0 * kPi / static_cast<double>(run.n_grid);

    systems::Trajectory traj;
    traj.dt = snap_dt;
    traj.system_tag = "burgers";
    traj.states.resize(run.snapshots, run.n_modes);

    double frac_sum = 0.0;
    auto record = [&](std::size_t snap_index) {
        const DctCoeffs a = dct_reduce(u, run.n_modes);
        for (std::size_t j = 0; j < run.n_modes; ++j) traj.states(snap_index, j) = a.coeffs[j];
        frac_sum += dct_energy_fraction(u, run.n_modes);
        if (full_fields) full_fields->push_back(u);
    };

    double energy0 = 0.0;
    for (double v : u) energy0 += v * v * dx;
    record(0);

    std::size_t total_steps = 0;
    for (std::size_t s = 1; s < run.snapshots; ++s) {
        for (std::size_t i = 0; i < substeps; ++i) {
            solver.step(u, dt);
            ++total_steps;
        }
        for (double v : u)
            if (!(std::abs(v) <= kDivergenceGuard))
                throw DivergenceError("burgers DNS diverged at snapshot " + std::to_string(s), s);
        record(s);
    }

    if (stats) {
        stats->energy_initial = energy0;
        double energy1 = 0.0;
        for (double v : u) energy1 += v * v * dx;
        stats->energy_final = energy1;
        stats->mean_mode_energy_fraction = frac_sum / static_cast<double>(run.snapshots);
        stats->dt = dt;
        stats->steps = total_steps;
    }
    return traj;
}

std::vector<systems::Trajectory> generate_burgers_ensemble(std::size_t n_traj,
                                                           const SpectrumConfig& cfg,
                                                           const BurgersRunConfig& run,
                                                           std::size_t threads) {
    if (n_traj < 1) throw ConfigError("generate_burgers_ensemble: n_traj must be >= 1");
    std::vector<systems::Trajectory> out(n_traj);
    std::vector<std::exception_ptr> errors(n_traj);

    const std::size_t workers = std::min(thread_cap(threads), n_traj);
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_traj) return;
            try {
                SpectrumConfig local = cfg;
                local.seed = cfg.seed + i;
                out[i] = run_reduced_dns(local, run);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < n_traj; ++i) {
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const DivergenceError& e) {
                throw DivergenceError("trajectory " + std::to_string(i) + ": " + e.what(), e.step);
            }
        }
    }
    return out;
}

} // namespace phaseflow::spectral
