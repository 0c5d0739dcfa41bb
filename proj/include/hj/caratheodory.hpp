#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "hj/geometry.hpp"
#include "hj/lagrangian.hpp"

namespace hj {

/// |u| beyond this value aborts an integration with DivergenceError.
inline constexpr double kDivergenceLimit = 1e12;

/// Piecewise-linear curve with uniformly spaced time nodes.
///
/// Nodes are stored lifted to the universal cover R^d, so consecutive nodes
/// differ by the actual displacement travelled on the segment; the integer
/// winding of a segment is the change of periodic image index across it.
/// Node 0 sits at t_start and the last node at t_end.
struct Curve {
    double t_start = 0.0;
    double t_end = 1.0;
    int dimension = 1;
    std::vector<Coord> points;

    /// Straight curve from x to the image of y selected by `winding`: winding 0
    /// is the nearest image of y, winding k adds k periods per axis.
    static Curve straight(const DomainDescriptor& domain, double t_start, double t_end, const Coord& x,
                          const Coord& y, int segments, std::array<int, kMaxDim> winding = {0, 0});

    [[nodiscard]] int segments() const { return static_cast<int>(points.size()) - 1; }
    [[nodiscard]] double dt() const { return (t_end - t_start) / segments(); }
    [[nodiscard]] double time(int node) const { return t_start + node * dt(); }
    [[nodiscard]] Coord velocity(int segment) const {
        return (1.0 / dt()) * (points[segment + 1] - points[segment]);
    }
    /// Lifted position at time s (clamped to the time range).
    [[nodiscard]] Coord position(double s) const;
    /// Node position reduced to the fundamental cell.
    [[nodiscard]] Coord node(int i, const DomainDescriptor& domain) const { return domain.wrap(points[i]); }
    [[nodiscard]] std::array<long, kMaxDim> winding(int segment, const DomainDescriptor& domain) const;
    /// Total lifted displacement between the endpoints.
    [[nodiscard]] Coord displacement() const { return points.back() - points.front(); }

    /// Throws PreconditionError on N < 1, non-increasing times or non-finite nodes.
    void validate() const;
    /// Same nodes moved rigidly in time by `shift`.
    [[nodiscard]] Curve shifted(double shift) const;
};

struct IntegratorStats {
    int substeps_per_segment = 0;
    int steps = 0;
    /// max over steps of h * |k2 - k3|, a crude local error indicator.
    double max_stage_gap = 0.0;
};

/// Solution of the scalar Caratheodory ODE along a curve, sampled at every
/// integrator substep: sample k = segment * substeps + j lies at times[k].
struct CaratheodoryTrajectory {
    Curve curve;
    std::vector<double> times;
    std::vector<double> u_values;
    double u0 = 0.0;
    IntegratorStats stats;

    [[nodiscard]] double end_value() const { return u_values.back(); }
    [[nodiscard]] int substeps() const { return stats.substeps_per_segment; }
    /// Linear interpolation in time; s must lie in [times.front(), times.back()]
    /// up to a relative slack of 1e-9.
    [[nodiscard]] double interpolate(double s) const;
};

/// Classical RK4 on u'(s) = L(s, xi(s), xi'(s), u(s)), u(t_start) = u0, with the
/// velocity constant on each segment and `substeps` fixed steps per segment.
[[nodiscard]] CaratheodoryTrajectory solve_caratheodory(const LagrangianModel& model, const Curve& curve,
                                                        double u0, int substeps = 8);

/// Affine ODE obtained by freezing u at a reference trajectory:
///   v' = L(s, eta, eta', u*) + L_u(s, eta, eta', u*) (v - u*),  v(t_start) = u0,
/// with u* the linear-in-time interpolant of `frozen`.
[[nodiscard]] CaratheodoryTrajectory solve_linearized(const LagrangianModel& model, const Curve& eta,
                                                      const CaratheodoryTrajectory& frozen, double u0,
                                                      int substeps = 8);

/// Quadrature used for the exponentially weighted integrals.
enum class Quadrature { Simpson, Trapezoid };

/// Time-dependent gauge F(s, x, v, u) for the splitting formula. `jet` is the
/// Lagrangian jet at the same arguments (the canonical gauge reads jet.du).
struct Gauge {
    std::string name;
    std::function<double(double s, const Coord& x, const Coord& v, double u, const LagrangianJet& jet)> fn;
};

[[nodiscard]] Gauge gauge_constant(double c);
/// F(s) = offset + amplitude * sin(2 pi frequency s).
[[nodiscard]] Gauge gauge_sine(double amplitude, double frequency, double offset = 0.0);
/// F = L_u along the trajectory.
[[nodiscard]] Gauge gauge_canonical();
/// Parses "const:<c>", "sin:<amplitude>:<frequency>[:<offset>]" or "canonical".
[[nodiscard]] Gauge parse_gauge(const std::string& text);

/// e^{int_0^t L_u} u0 + int_0^t e^{int_s^t L_u} (L - u L_u) ds along the trajectory.
[[nodiscard]] double integrating_factor_value(const LagrangianModel& model, const CaratheodoryTrajectory& traj,
                                              Quadrature rule = Quadrature::Simpson);

/// The two terms of integrating_factor_value separately, plus the largest
/// L_u sample (so -max_rate is the smallest discount met along the trajectory).
struct IntegratingFactorTerms {
    /// e^{int_{t_start}^{t_end} L_u}
    double factor = 1.0;
    /// int e^{int_s^{t_end} L_u} (L - u L_u) ds
    double integral = 0.0;
    double max_rate = 0.0;
};

[[nodiscard]] IntegratingFactorTerms integrating_factor_terms(const LagrangianModel& model,
                                                              const CaratheodoryTrajectory& traj,
                                                              Quadrature rule = Quadrature::Simpson);

/// e^{int_0^t M} u0 + int_0^t e^{int_s^t M} L(s, xi, xi', 0) ds with the integral
/// mean M(s) = int_0^1 L_u(s, xi, xi', theta u(s)) dtheta (8-point Gauss-Legendre).
[[nodiscard]] double hatLu_splitting_value(const LagrangianModel& model, const CaratheodoryTrajectory& traj,
                                           Quadrature rule = Quadrature::Simpson);

/// e^{int_0^t F} u0 + int_0^t e^{int_s^t F} (L - F u) ds for an arbitrary gauge F.
/// Throws PreconditionError naming the time of the first non-finite F sample.
[[nodiscard]] double gaugeF_splitting_value(const LagrangianModel& model, const CaratheodoryTrajectory& traj,
                                            const Gauge& gauge, Quadrature rule = Quadrature::Simpson);

/// Gronwall envelope e^{K (t - t_start)} (|u0| + int |L(s, xi, xi', 0)| ds) for the
/// end value of the trajectory.
[[nodiscard]] double a_priori_bound(const LagrangianModel& model, const CaratheodoryTrajectory& traj);

/// Generic exponentially weighted integral on a trajectory sample grid:
///   e^{R(t)} u0 + int e^{R(t) - R(s)} g(s) ds,  R(s) = int_{t_start}^s r.
/// `rate` and `source` hold (substeps + 1) samples per segment, evaluated with the
/// segment's own velocity, laid out as segment * (substeps + 1) + j.
[[nodiscard]] double exp_weighted_value(double u0, const std::vector<double>& rate,
                                        const std::vector<double>& source, int segments, int substeps,
                                        double step, Quadrature rule);

/// Writes s, x..., v..., u columns (one row per sample) for debugging.
void write_trajectory_csv(const CaratheodoryTrajectory& traj, const DomainDescriptor& domain,
                          const std::string& path);

}  // namespace hj
