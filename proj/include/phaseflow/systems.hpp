#pragma once

#include <functional>
#include <string>

#include "phaseflow/common.hpp"

namespace phaseflow::systems {

using StateVector = std::vector<double>;

/// Map from a state to its increment-per-unit-time target.
using TargetFn = std::function<StateVector(const StateVector&)>;

/// Time-ordered snapshots with uniform spacing.
struct Trajectory {
    Matrix states;          // N x M, rows time-ordered
    double dt = 0.0;
    std::string system_tag;

    std::size_t length() const { return states.rows(); }
    std::size_t dim() const { return states.cols(); }
};

enum class TargetKind {
    FiniteDifference, // y^k = (x^{k+1} - x^k) / dt, N-1 rows
    AnalyticRhs,      // y^k = F(x^k), N rows
};

struct TargetSeries {
    Matrix targets;
    TargetKind kind = TargetKind::FiniteDifference;
};

/// Van der Pol increment target: (x2, mu (1 - x1^2) x2 - x1).
StateVector vdp_target(const StateVector& x, double mu);

/// Non-rational, non-polynomial oscillator target with
/// g(x) = x1 x2 / (1 + (x2 / 0.52)^4):
///   ( 2.5 - 100 g,  -200 g + 9.2 - 2.3 x2 - 1.28 |x2|^{3/2} ).
StateVector yg_target(const StateVector& x);

/// Forward map x^{k+1} = x^k + dt * target_fn(x^k); returns n+1 snapshots
/// including x0. Throws DivergenceError when a component passes the guard.
Trajectory generate_trajectory(const TargetFn& target_fn, const StateVector& x0,
                               double dt, std::size_t n, std::string system_tag = {});

/// Forward-difference targets y^k = (x^{k+1} - x^k) / dt for k = 0..N-2.
TargetSeries targets_from_trajectory(const Trajectory& traj);

/// Analytic targets y^k = target_fn(x^k) at every snapshot; the oracle-side
/// counterpart of the finite-difference series.
TargetSeries targets_from_function(const Trajectory& traj, const TargetFn& target_fn);

} // namespace phaseflow::systems
