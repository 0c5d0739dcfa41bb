#pragma once

#include <cstdint>
#include <string>

namespace hj {

/// Numerical settings shared by every solver in the stack.
struct SolverConfig {
    /// Grid nodes per axis for Lax-Oleinik and finite-difference grids.
    int resolution = 64;
    /// Interior nodes of each optimized curve (segments = curve_nodes + 1).
    int curve_nodes = 32;
    /// RK4 steps per curve segment.
    int substeps = 8;
    double grad_tol = 1e-6;
    int max_iterations = 200;
    /// Shortest admissible horizon t2 - t1.
    double min_horizon = 1e-3;
    /// Straight-line starts in every winding class with |k| <= max_winding per axis.
    int max_winding = 1;
    int random_starts = 4;
    /// Random start perturbation, as a fraction of the period.
    double random_amplitude = 0.1;
    std::uint64_t seed = 0;
    /// Skip provably dominated starts and grid candidates (lower bound from (L2)/(L3)).
    bool prune = true;
    /// Stationary fixed point: step length, update tolerance and iteration cap.
    double stationary_step = 0.5;
    double fp_tol = 1e-6;
    int fp_max_iter = 500;
    /// Backward-calibrated tail certificate and horizon cap.
    double tail_tol = 1e-5;
    double max_tail_horizon = 50.0;
    /// Worker threads (0: HJ_THREADS environment variable, else hardware concurrency).
    int threads = 0;

    /// Throws ConfigError naming the first invalid key.
    void validate() const;
};

}  // namespace hj
