#include "phaseflow/systems.hpp"

#include <cmath>
#include <utility>

namespace phaseflow::systems {

StateVector vdp_target(const StateVector& x, double mu) {
    if (x.size() != 2) throw ShapeError("vdp_target: state must have 2 components");
    require_finite(x, "vdp_target");
    return {x[1], mu * (1.0 - x[0] * x[0]) * x[1] - x[0]};
}

StateVector yg_target(const StateVector& x) {
    if (x.size() != 2) throw ShapeError("yg_target: state must have 2 components");
    require_finite(x, "yg_target");
    const double r = x[1] / 0.52;
    const double g = x[0] * x[1] / (1.0 + r * r * r * r);
    const double y1 = 2.5 - 100.0 * g;
    const double y2 = -200.0 * g + 9.2 - 2.3 * x[1] - 1.28 * std::pow(std::abs(x[1]), 1.5);
    return {y1, y2};
}

Trajectory generate_trajectory(const TargetFn& target_fn, const StateVector& x0,
                               double dt, std::size_t n, std::string system_tag) {
    if (dt <= 0.0) throw ConfigError("generate_trajectory: dt must be positive");
    if (n < 1) throw ConfigError("generate_trajectory: n must be at least 1");
    require_finite(x0, "generate_trajectory");

    const std::size_t m = x0.size();
    Trajectory traj;
    traj.dt = dt;
    traj.system_tag = std::move(system_tag);
    traj.states.resize(n + 1, m);

    StateVector x = x0;
    for (std::size_t j = 0; j < m; ++j) traj.states(0, j) = x[j];
    for (std::size_t k = 0; k < n; ++k) {
        const StateVector f = target_fn(x);
        if (f.size() != m) throw ShapeError("generate_trajectory: target dimension mismatch");
        for (std::size_t j = 0; j < m; ++j) {
            x[j] += dt * f[j];
            if (!(std::abs(x[j]) <= kDivergenceGuard))
                throw DivergenceError("generate_trajectory: state diverged at step " +
                                          std::to_string(k + 1),
                                      k + 1);
            traj.states(k + 1, j) = x[j];
        }
    }
    return traj;
}

TargetSeries targets_from_trajectory(const Trajectory& traj) {
    const std::size_t n = traj.length();
    if (n < 2) throw DataError("targets_from_trajectory: need at least 2 snapshots");
    if (traj.dt <= 0.0) throw ConfigError("targets_from_trajectory: dt must be positive");

    TargetSeries out;
    out.kind = TargetKind::FiniteDifference;
    out.targets.resize(n - 1, traj.dim());
    const double inv_dt = 1.0 / traj.dt;
    for (std::size_t k = 0; k + 1 < n; ++k)
        for (std::size_t j = 0; j < traj.dim(); ++j)
            out.targets(k, j) = (traj.states(k + 1, j) - traj.states(k, j)) * inv_dt;
    return out;
}

TargetSeries targets_from_function(const Trajectory& traj, const TargetFn& target_fn) {
    TargetSeries out;
    out.kind = TargetKind::AnalyticRhs;
    out.targets.resize(traj.length(), traj.dim());
    StateVector x(traj.dim());
    for (std::size_t k = 0; k < traj.length(); ++k) {
        for (std::size_t j = 0; j < traj.dim(); ++j) x[j] = traj.states(k, j);
        const StateVector f = target_fn(x);
        for (std::size_t j = 0; j < traj.dim(); ++j) out.targets(k, j) = f[j];
    }
    return out;
}

} // namespace phaseflow::systems
