#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hj/caratheodory.hpp"
#include "hj/config.hpp"
#include "hj/lagrangian.hpp"

namespace hj {

struct StartDiagnostics {
    /// "warm", "winding" or "random".
    std::string kind;
    std::array<int, kMaxDim> winding{0, 0};
    /// Integral value (u_end - u0) reached by this start; NaN when pruned.
    double value = 0.0;
    bool converged = false;
    bool pruned = false;
    int iterations = 0;
    double grad_norm = 0.0;
};

struct LocalMinimum {
    double value = 0.0;
    Curve curve;
};

/// Result of minimizing the Herglotz functional over curves with pinned ends.
struct HerglotzResult {
    /// h_L = inf int L ds = u_xi(t2) - u0 along the minimizer.
    double value = 0.0;
    double u0 = 0.0;
    Curve minimizer;
    CaratheodoryTrajectory trajectory;
    double stationarity_residual = 0.0;
    double grad_norm = 0.0;
    int starts_tried = 0;
    bool converged = false;
    /// Every start was pruned against a finite options.ceiling; value is NaN.
    bool dominated = false;
    std::vector<StartDiagnostics> starts;
    /// Distinct converged local minima, best first.
    std::vector<LocalMinimum> local_minima;

    /// u_xi(t2) along the minimizer.
    [[nodiscard]] double end_value() const { return u0 + value; }
};

struct HerglotzOptions {
    /// Extra initial curves tried before the straight and random starts.
    std::vector<Curve> warm_starts;
    /// Starts whose winding class provably ends above this u_xi(t2) are skipped.
    double ceiling = std::numeric_limits<double>::infinity();
    /// Random stream for the perturbed starts (combined with cfg.seed).
    std::uint64_t stream = 0;
    /// A converged warm start stands in for the straight start of its own
    /// winding class.
    bool warm_covers_class = true;
};

/// Negative-type fundamental solution h_L(t1, t2, x, y, u0) by multi-start
/// quasi-Newton descent on the interior curve nodes with adjoint gradients.
/// Throws ConvergenceError when no start converges, unless every start was
/// pruned against a finite options.ceiling (then `dominated` is set).
[[nodiscard]] HerglotzResult fundamental_solution(const LagrangianModel& model, double t1, double t2,
                                                  const Coord& x, const Coord& y, double u0,
                                                  const SolverConfig& cfg, const HerglotzOptions& options = {});

/// Same minimization for the linearized functional v_eta(t2) of solve_linearized,
/// with u frozen at `frozen`. Its optimal value equals h_L when `frozen` is the
/// trajectory of a minimizer of the original problem and L is concave in u.
[[nodiscard]] HerglotzResult linearized_fundamental_solution(const LagrangianModel& model, double t1, double t2,
                                                             const Coord& x, const Coord& y, double u0,
                                                             const CaratheodoryTrajectory& frozen,
                                                             const SolverConfig& cfg,
                                                             const HerglotzOptions& options = {});

/// Gradient of J = u_xi(t_end) with respect to the interior nodes of `curve`,
/// from the discrete adjoint of the RK4 scheme used by solve_caratheodory. The
/// adjoint variable approximates exp(int_s^t L_u), so this is the discretization
/// of dJ = int e^{int_s^t L_u} (L_x . dxi + L_v . dxi') ds for hat-function
/// variations dxi.
[[nodiscard]] std::vector<Coord> adjoint_gradient(const LagrangianModel& model, const Curve& curve,
                                                  const CaratheodoryTrajectory& traj);

/// Same for the linearized functional with u frozen at `frozen`.
[[nodiscard]] std::vector<Coord> linearized_adjoint_gradient(const LagrangianModel& model, const Curve& eta,
                                                             const CaratheodoryTrajectory& frozen,
                                                             const CaratheodoryTrajectory& traj);

/// Sup-norm over interior nodes of the discrete Herglotz-Euler-Lagrange residual
/// in weak form. For the hat function phi_i of node i,
///   r_i = int w(s) (L_x phi_i + L_v phi_i') ds / (h w(s_i)),  w(s) = e^{int_s^t L_u},
/// which for smooth curves equals L_x + L_u L_v - d/ds L_v at s_i up to O(h^2).
/// It is the residual of the same discretization the optimizer minimizes.
[[nodiscard]] double herglotz_residual(const LagrangianModel& model, const Curve& curve,
                                       const CaratheodoryTrajectory& traj);

/// Lower bound on u_xi(t1 + duration) over all curves whose lifted displacement
/// has length >= distance, starting from u0. Uses the integral-mean splitting
/// with |mean L_u| <= K and L(s,x,v,0) >= a|v|^q - c0. Returns -infinity unless
/// the model declares (L2) and (L3).
[[nodiscard]] double action_lower_bound(const LagrangianModel& model, double u0, double duration,
                                        double distance);

}  // namespace hj
