#pragma once

#include <string>
#include <vector>

#include "hj/caratheodory.hpp"
#include "hj/config.hpp"
#include "hj/grid.hpp"
#include "hj/lagrangian.hpp"
#include "hj/lax_oleinik.hpp"

namespace hj {

enum class FormulaId { I, II, III, IV, V, VI, VII, DISC_E, DISC_S };

[[nodiscard]] std::string formula_name(FormulaId id);

struct FormulaReport {
    FormulaId id = FormulaId::I;
    /// formula_name plus a qualifier, e.g. "VII[const:-1]".
    std::string label;
    double value = 0.0;
    /// Point and curve summary, e.g. "t=0.5 x=(0.25) y*=(0.2) candidates=64".
    std::string inputs;
    /// value - reference; NaN until compared.
    double discrepancy = 0.0;
    /// rep_VI: candidates whose end value broke the a-priori bound (always 0 in practice).
    int bound_violations = 0;
    /// rep_IV / rep_V: truncation horizon, certified tail bound and smallest discount.
    double horizon = 0.0;
    double tail_bound = 0.0;
    double delta = 0.0;
};

/// Sets r.discrepancy = r.value - reference.value for each report.
void compare_against(std::vector<FormulaReport>& reports, const FormulaReport& reference);

/// Candidate curves of the evolutionary formulas at (t, x): one converged
/// minimizer for every grid node y not excluded by the lower bound.
struct CandidateSet {
    double t = 0.0;
    Coord x{0.0, 0.0};
    PointSolve solve;
    /// Index into solve.candidates of the minimizing y.
    std::size_t best = 0;
};

[[nodiscard]] CandidateSet evolution_candidates(const LagrangianModel& model, const GridFunction& phi, double t,
                                                const Coord& x, const SolverConfig& cfg);

/// min_y phi(y) + h_L(0, t, y, x, phi(y)) (the reference backend).
[[nodiscard]] FormulaReport rep_I(const LagrangianModel& model, const CandidateSet& set);
/// Same minimization with each candidate valued by integrating_factor_value.
[[nodiscard]] FormulaReport rep_II(const LagrangianModel& model, const CandidateSet& set);
/// Linearized problem with u frozen along the minimizer xi* of rep_I.
/// Requires (L5). `candidate` selects another converged candidate/minimizer when
/// testing independence from xi*.
[[nodiscard]] FormulaReport rep_III(const LagrangianModel& model, const GridFunction& phi, const CandidateSet& set,
                                    const SolverConfig& cfg);
[[nodiscard]] FormulaReport rep_III_with(const LagrangianModel& model, double t, const Coord& x, int y,
                                         const GridFunction& phi, const CaratheodoryTrajectory& frozen,
                                         const SolverConfig& cfg);
/// Integral-mean splitting; also counts violations of the a-priori bound.
[[nodiscard]] FormulaReport rep_VI(const LagrangianModel& model, const CandidateSet& set);
/// Gauge-F splitting.
[[nodiscard]] FormulaReport rep_VII(const LagrangianModel& model, const CandidateSet& set, const Gauge& gauge);
/// Discounted models: e^{-lambda t} phi(xi(0)) + int_0^t e^{lambda (s - t)} L0(xi, xi') ds evaluated
/// directly by Gauss-Legendre quadrature on the candidate curves.
[[nodiscard]] FormulaReport disc_evolution(const LagrangianModel& model, const CandidateSet& set);

/// Convenience wrappers computing the candidate set first.
[[nodiscard]] FormulaReport rep_I(const LagrangianModel& model, const GridFunction& phi, double t, const Coord& x,
                                  const SolverConfig& cfg);
[[nodiscard]] FormulaReport rep_II(const LagrangianModel& model, const GridFunction& phi, double t, const Coord& x,
                                   const SolverConfig& cfg);
[[nodiscard]] FormulaReport rep_III(const LagrangianModel& model, const GridFunction& phi, double t, const Coord& x,
                                    const SolverConfig& cfg);
[[nodiscard]] FormulaReport rep_VI(const LagrangianModel& model, const GridFunction& phi, double t, const Coord& x,
                                   const SolverConfig& cfg);
[[nodiscard]] FormulaReport rep_VII(const LagrangianModel& model, const GridFunction& phi, double t, const Coord& x,
                                    const Gauge& gauge, const SolverConfig& cfg);

/// Backward calibrated curve from grid node x: argmin curves of the fixed-point
/// step chained backward over [-horizon, 0], with its Caratheodory trajectory
/// started at u(xi(-horizon)).
struct CalibratedCurve {
    int node = 0;
    Curve curve;
    CaratheodoryTrajectory trajectory;
    /// Grid nodes visited at -k * step, k = 0..pieces (chain[0] = node).
    std::vector<int> chain;
    int pieces = 0;
    double step = 0.0;
    double horizon = 0.0;
    /// Smallest -L_u seen along the chain and the certificate e^{-delta T} ||u||.
    double delta = 0.0;
    double tail_bound = 0.0;
};

/// Chains backward until e^{-delta T} ||u||_inf < cfg.tail_tol. Throws Error when
/// delta <= 0 or when the horizon would exceed cfg.max_tail_horizon.
[[nodiscard]] CalibratedCurve backward_calibrated_curve(const LagrangianModel& model, const StationaryResult& fixed,
                                                        int node, const SolverConfig& cfg);

/// Truncated infinite-horizon integral along the calibrated curve. Requires (L6)
/// and a time-independent model.
[[nodiscard]] FormulaReport rep_IV(const LagrangianModel& model, const StationaryResult& fixed, int node,
                                   const SolverConfig& cfg);
[[nodiscard]] FormulaReport rep_IV(const LagrangianModel& model, const CalibratedCurve& cal);

/// Linearized infinite-horizon problem with u frozen along the calibrated curve,
/// minimized piece by piece from the far end with the chain nodes pinned.
/// Requires (L5) and (L6).
[[nodiscard]] FormulaReport rep_V(const LagrangianModel& model, const CalibratedCurve& cal, const SolverConfig& cfg);

/// Discounted models: int_{-T}^0 e^{lambda s} L0(xi, xi') ds on the calibrated curve.
[[nodiscard]] FormulaReport disc_stationary(const LagrangianModel& model, const CalibratedCurve& cal);

struct TimeRescalingReport {
    double lambda = 0.0;
    double final_time = 0.0;
    GridFunction u;
    GridFunction v;
    /// ||v(T) - e^{lambda T} u(T)||_inf
    double defect = 0.0;
};

/// Evolves u under L0 - lambda u and v under e^{lambda s} L0 from the same phi.
[[nodiscard]] TimeRescalingReport time_rescaling_check(const TonelliSpec& l0, double lambda,
                                                       const GridFunction& phi, double final_time, int steps,
                                                       const SolverConfig& cfg);

}  // namespace hj
