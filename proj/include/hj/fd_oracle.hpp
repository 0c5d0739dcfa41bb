#pragma once

#include "hj/grid.hpp"
#include "hj/lagrangian.hpp"

namespace hj {

/// Lax-Friedrichs settings. A non-positive viscosity entry selects 1.1 times the
/// largest |H_p| over the one-sided and central differences, recomputed each step.
struct FDConfig {
    int resolution = 128;
    double cfl = 0.9;
    Coord artificial_viscosity{0.0, 0.0};
    double t_end = 1.0;
    /// fd_stationary stops once ||u^{n+1} - u^n||_inf / dt < steady_tol.
    double steady_tol = 1e-7;
    long max_steps = 2'000'000;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

struct FDResult {
    GridFunction u;
    double time = 0.0;
    long steps = 0;
    /// Largest |H_p| met in any stencil.
    double max_hp = 0.0;
    /// Set when a fixed viscosity was below max_hp at some step (the scheme may
    /// not be monotone there).
    bool viscosity_below_hp = false;
};

/// Explicit monotone scheme
///   u^{n+1} = u^n - dt [H(t, x, u^n, D_c u^n) - sum_a nu_a (u_{+a} - 2u + u_{-a}) / (2 dx_a)]
/// with dt = min(cfl / (sum_a nu_a / dx_a + K), cfl * min_a dx_a). Throws
/// Error when ||u^n|| leaves the envelope e^{K t}(||phi|| + c t), c = sup |H(t, x, 0, 0)|.
[[nodiscard]] FDResult fd_evolve(const HamiltonianModel& hmodel, const GridFunction& phi, const FDConfig& cfg);

/// Large-time limit of fd_evolve from phi = 0 for a time-independent H with H_u > 0.
/// Throws ConvergenceError when the update does not settle within max_steps.
[[nodiscard]] FDResult fd_stationary(const HamiltonianModel& hmodel, const FDConfig& cfg);

}  // namespace hj
