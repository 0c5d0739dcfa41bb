#pragma once

#include <memory>
#include <vector>

#include "hj/caratheodory.hpp"
#include "hj/config.hpp"
#include "hj/grid.hpp"
#include "hj/herglotz.hpp"
#include "hj/lagrangian.hpp"

namespace hj {

/// Converged local minima of every (x, y) pair from the previous application of
/// T, reused as warm starts. Pairs are keyed by x * nodes + y.
class WarmStartCache {
public:
    explicit WarmStartCache(std::size_t nodes);

    [[nodiscard]] std::size_t nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<Curve>& get(std::size_t x, std::size_t y) const;
    void put(std::size_t x, std::size_t y, std::vector<Curve> curves);

private:
    std::size_t nodes_;
    std::vector<std::vector<Curve>> pairs_;
};

/// One application of the Lax-Oleinik operator on a grid.
struct LaxOleinikStep {
    GridFunction u;
    /// Per node x: index of the minimizing grid node y (smallest index among ties).
    std::vector<int> argmin;
    /// Per node x: minimizing curve from y = argmin[x] at t1 to x at t2.
    std::vector<Curve> curves;
    /// Inner fundamental-solution calls and (x, y) pairs skipped by the lower bound.
    long solves = 0;
    long pruned_pairs = 0;
};

/// One inner solve of the grid minimization at a point x.
struct GridCandidate {
    int y = -1;
    HerglotzResult result;
};

struct PointSolve {
    /// min over grid nodes y of phi(y) + h_L(t1, t2, y, x, phi(y)).
    double value = 0.0;
    int argmin = -1;
    Curve curve;
    /// Every solved (not pruned) candidate, when requested.
    std::vector<GridCandidate> candidates;
    long solves = 0;
    long pruned = 0;
};

/// Grid minimization at an arbitrary point x. `cache_row` selects the cache
/// entries of x when a cache is given (x must then be grid node cache_row).
[[nodiscard]] PointSolve solve_at_point(const LagrangianModel& model, const GridFunction& phi, double t1, double t2,
                                        const Coord& x, const SolverConfig& cfg, bool keep_candidates = false,
                                        WarmStartCache* cache = nullptr, std::size_t cache_row = 0);

/// (T_{t1}^{t2} phi)(x) = min over grid nodes y of phi(y) + h_L(t1, t2, y, x, phi(y))
/// at every node x. With a cache, each pair first tries its curves from the
/// previous call and the cache is refreshed on return.
[[nodiscard]] LaxOleinikStep apply_T(const LagrangianModel& model, const GridFunction& phi, double t1, double t2,
                                     const SolverConfig& cfg, WarmStartCache* cache = nullptr);

struct EvolutionResult {
    std::vector<double> times;
    std::vector<GridFunction> frames;
    /// argmin[k] and curves[k] describe the step producing frames[k + 1].
    std::vector<std::vector<int>> argmin;
    std::vector<std::vector<Curve>> curves;
};

/// Applies T over `steps` equal steps of [0, final_time], starting from phi.
[[nodiscard]] EvolutionResult evolve(const LagrangianModel& model, const GridFunction& phi, double final_time,
                                     int steps, const SolverConfig& cfg);

struct StationaryResult {
    /// Last iterate u_k with ||T u_k - u_k|| < fp_tol.
    GridFunction u;
    /// ||T u - u||_inf for the returned u.
    double residual = 0.0;
    int iterations = 0;
    /// ||u_{k+1} - u_k||_inf per iteration.
    std::vector<double> history;
    /// The application T u (argmin map and curves of the returned u).
    LaxOleinikStep step;
};

/// Fixed point u = T^{stationary_step} u by iteration from `initial` (zero when
/// null). Requires a time-independent model declaring (L6).
[[nodiscard]] StationaryResult stationary_fixed_point(const LagrangianModel& model, const SolverConfig& cfg,
                                                      const GridFunction* initial = nullptr);

}  // namespace hj
