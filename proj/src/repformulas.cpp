#include "hj/repformulas.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "hj/errors.hpp"
#include "hj/herglotz.hpp"

namespace hj {

std::string formula_name(FormulaId id) {
    switch (id) {
        case FormulaId::I: return "I";
        case FormulaId::II: return "II";
        case FormulaId::III: return "III";
        case FormulaId::IV: return "IV";
        case FormulaId::V: return "V";
        case FormulaId::VI: return "VI";
        case FormulaId::VII: return "VII";
        case FormulaId::DISC_E: return "DISC_E";
        case FormulaId::DISC_S: return "DISC_S";
    }
    return "?";
}

void compare_against(std::vector<FormulaReport>& reports, const FormulaReport& reference) {
    for (auto& r : reports) r.discrepancy = r.value - reference.value;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<double, 8> kGaussNodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                            0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                              0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};

std::string point_text(const Coord& x, int dim) {
    std::ostringstream os;
    os.precision(6);
    os << "(" << x[0];
    if (dim == 2) os << ", " << x[1];
    os << ")";
    return os.str();
}

FormulaReport make_report(FormulaId id, const std::string& qualifier, double value, const std::string& inputs) {
    FormulaReport r;
    r.id = id;
    r.label = formula_name(id) + (qualifier.empty() ? "" : "[" + qualifier + "]");
    r.value = value;
    r.inputs = inputs;
    r.discrepancy = kNaN;
    return r;
}

std::string set_inputs(const LagrangianModel& model, const CandidateSet& set) {
    std::ostringstream os;
    os.precision(6);
    const int dim = model.dimension();
    const auto& best = set.solve.candidates[set.best];
    os << "t=" << set.t << " x=" << point_text(set.x, dim)
       << " y*=" << point_text(best.result.minimizer.points.front(), dim)
       << " candidates=" << set.solve.candidates.size();
    return os.str();
}

/// Minimum of `value(candidate)` over the candidate set.
template <typename F>
double min_over(const CandidateSet& set, F&& value) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : set.solve.candidates) best = std::min(best, value(c));
    return best;
}

/// int_{t_start}^{t_end} w(s) L(s, xi, xi', 0) ds by 8-point Gauss-Legendre per segment.
template <typename W>
double weighted_action(const LagrangianModel& model, const Curve& c, W&& weight) {
    const double h = c.dt();
    double acc = 0.0;
    for (int i = 0; i < c.segments(); ++i) {
        const Coord v = c.velocity(i);
        const double t0 = c.time(i);
        for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
            const double theta = 0.5 * (kGaussNodes[q] + 1.0);
            const double s = t0 + theta * h;
            const Coord x = c.points[i] + (theta * h) * v;
            acc += 0.5 * h * kGaussWeights[q] * weight(s) * model.value(s, x, v, 0.0);
        }
    }
    return acc;
}

double require_discount(const LagrangianModel& model) {
    if (!model.discount_rate()) throw PreconditionError("formula needs a discounted model");
    return *model.discount_rate();
}

Curve sub_curve(const Curve& c, int first_segment, int segments) {
    Curve out;
    out.dimension = c.dimension;
    out.t_start = c.time(first_segment);
    out.t_end = c.time(first_segment + segments);
    out.points.assign(c.points.begin() + first_segment, c.points.begin() + first_segment + segments + 1);
    return out;
}

}  // namespace

CandidateSet evolution_candidates(const LagrangianModel& model, const GridFunction& phi, double t, const Coord& x,
                                  const SolverConfig& cfg) {
    phi.validate();
    if (!(phi.domain == model.domain())) throw PreconditionError("grid and model domains differ");
    if (!(t >= cfg.min_horizon)) throw PreconditionError("t below min_horizon");
    CandidateSet set;
    set.t = t;
    set.x = x;
    set.solve = solve_at_point(model, phi, 0.0, t, x, cfg, true);
    for (std::size_t i = 0; i < set.solve.candidates.size(); ++i) {
        if (set.solve.candidates[i].y == set.solve.argmin) set.best = i;
    }
    return set;
}

FormulaReport rep_I(const LagrangianModel& model, const CandidateSet& set) {
    return make_report(FormulaId::I, "", set.solve.value, set_inputs(model, set));
}

FormulaReport rep_II(const LagrangianModel& model, const CandidateSet& set) {
    const double v =
        min_over(set, [&](const GridCandidate& c) { return integrating_factor_value(model, c.result.trajectory); });
    return make_report(FormulaId::II, "", v, set_inputs(model, set));
}

FormulaReport rep_VI(const LagrangianModel& model, const CandidateSet& set) {
    int violations = 0;
    const double v = min_over(set, [&](const GridCandidate& c) {
        const auto& traj = c.result.trajectory;
        if (std::abs(traj.end_value()) > a_priori_bound(model, traj) * (1.0 + 1e-12)) ++violations;
        return hatLu_splitting_value(model, traj);
    });
    FormulaReport r = make_report(FormulaId::VI, "", v, set_inputs(model, set));
    r.bound_violations = violations;
    return r;
}

FormulaReport rep_VII(const LagrangianModel& model, const CandidateSet& set, const Gauge& gauge) {
    const double v = min_over(
        set, [&](const GridCandidate& c) { return gaugeF_splitting_value(model, c.result.trajectory, gauge); });
    return make_report(FormulaId::VII, gauge.name, v, set_inputs(model, set));
}

FormulaReport disc_evolution(const LagrangianModel& model, const CandidateSet& set) {
    const double lambda = require_discount(model);
    const double t = set.t;
    const double v = min_over(set, [&](const GridCandidate& c) {
        const Curve& xi = c.result.minimizer;
        return std::exp(-lambda * t) * c.result.u0 +
               weighted_action(model, xi, [&](double s) { return std::exp(lambda * (s - t)); });
    });
    return make_report(FormulaId::DISC_E, "", v, set_inputs(model, set));
}

FormulaReport rep_III_with(const LagrangianModel& model, double t, const Coord& x, int y, const GridFunction& phi,
                           const CaratheodoryTrajectory& frozen, const SolverConfig& cfg) {
    if (!model.declares(Condition::L5)) throw PreconditionError("rep_III needs a model declaring (L5)");
    HerglotzOptions opts;
    opts.warm_starts = {frozen.curve};
    const HerglotzResult r =
        linearized_fundamental_solution(model, 0.0, t, phi.node(static_cast<std::size_t>(y)), x,
                                        phi[static_cast<std::size_t>(y)], frozen, cfg, opts);
    std::ostringstream os;
    os.precision(6);
    os << "t=" << t << " x=" << point_text(x, model.dimension())
       << " y*=" << point_text(phi.node(static_cast<std::size_t>(y)), model.dimension())
       << " frozen_end=" << frozen.end_value();
    return make_report(FormulaId::III, "", r.end_value(), os.str());
}

FormulaReport rep_III(const LagrangianModel& model, const GridFunction& phi, const CandidateSet& set,
                      const SolverConfig& cfg) {
    if (!model.declares(Condition::L5)) throw PreconditionError("rep_III needs a model declaring (L5)");
    const auto& best = set.solve.candidates[set.best];
    return rep_III_with(model, set.t, set.x, best.y, phi, best.result.trajectory, cfg);
}

FormulaReport rep_I(const LagrangianModel& model, const GridFunction& phi, double t, const Coord& x,
                    const SolverConfig& cfg) {
    return rep_I(model, evolution_candidates(model, phi, t, x, cfg));
}

FormulaReport rep_II(const LagrangianModel& model, const GridFunction& phi, double t, const Coord& x,
                     const SolverConfig& cfg) {
    return rep_II(model, evolution_candidates(model, phi, t, x, cfg));
}

FormulaReport rep_III(const LagrangianModel& model, const GridFunction& phi, double t, const Coord& x,
                      const SolverConfig& cfg) {
    if (!model.declares(Condition::L5)) throw PreconditionError("rep_III needs a model declaring (L5)");
    return rep_III(model, phi, evolution_candidates(model, phi, t, x, cfg), cfg);
}

FormulaReport rep_VI(const LagrangianModel& model, const GridFunction& phi, double t, const Coord& x,
                     const SolverConfig& cfg) {
    return rep_VI(model, evolution_candidates(model, phi, t, x, cfg));
}

FormulaReport rep_VII(const LagrangianModel& model, const GridFunction& phi, double t, const Coord& x,
                      const Gauge& gauge, const SolverConfig& cfg) {
    return rep_VII(model, evolution_candidates(model, phi, t, x, cfg), gauge);
}

// ---------------------------------------------------------------------------
// Stationary formulas

CalibratedCurve backward_calibrated_curve(const LagrangianModel& model, const StationaryResult& fixed, int node,
                                          const SolverConfig& cfg) {
    if (model.time_dependent()) throw PreconditionError("stationary formulas need a time-independent model");
    if (!model.declares(Condition::L6)) throw PreconditionError("stationary formulas need (L6)");
    const auto& step = fixed.step;
    const std::size_t n = fixed.u.size();
    if (node < 0 || static_cast<std::size_t>(node) >= n || step.curves.size() != n) {
        throw PreconditionError("node outside the fixed-point grid");
    }
    const Curve& first = step.curves[static_cast<std::size_t>(node)];
    const double delta_t = first.t_end - first.t_start;
    const int seg = first.segments();
    const double unorm = fixed.u.sup_norm();

    CalibratedCurve cal;
    cal.node = node;
    cal.step = delta_t;
    cal.chain = {node};
    double delta = std::numeric_limits<double>::infinity();
    for (;;) {
        const auto k = static_cast<std::size_t>(cal.chain.back());
        const int y = step.argmin[k];
        const auto piece = solve_caratheodory(model, step.curves[k], fixed.u[static_cast<std::size_t>(y)], cfg.substeps);
        delta = std::min(delta, -integrating_factor_terms(model, piece).max_rate);
        cal.chain.push_back(y);
        ++cal.pieces;
        if (!(delta > 0.0)) {
            throw Error("measured discount delta = " + std::to_string(delta) + " <= 0 along the calibrated curve");
        }
        const double horizon = cal.pieces * delta_t;
        if (std::exp(-delta * horizon) * unorm >= cfg.tail_tol) {
            if (horizon + delta_t > cfg.max_tail_horizon * (1.0 + 1e-12)) {
                throw Error("tail certificate not reached within max_tail_horizon = " +
                            std::to_string(cfg.max_tail_horizon));
            }
            continue;
        }
        // Assemble xi on [-horizon, 0], far end first, keeping the lift continuous.
        Curve c;
        c.dimension = model.dimension();
        c.t_start = -horizon;
        c.t_end = 0.0;
        c.points.reserve(static_cast<std::size_t>(cal.pieces * seg + 1));
        for (int j = cal.pieces - 1; j >= 0; --j) {
            const Curve& p = step.curves[static_cast<std::size_t>(cal.chain[static_cast<std::size_t>(j)])];
            const Coord shift = c.points.empty() ? Coord{0.0, 0.0} : c.points.back() - p.points.front();
            for (std::size_t i = c.points.empty() ? 0 : 1; i < p.points.size(); ++i) {
                c.points.push_back(p.points[i] + shift);
            }
        }
        const double u_start = fixed.u[static_cast<std::size_t>(cal.chain.back())];
        cal.trajectory = solve_caratheodory(model, c, u_start, cfg.substeps);
        cal.curve = std::move(c);
        delta = std::min(delta, -integrating_factor_terms(model, cal.trajectory).max_rate);
        if (!(delta > 0.0)) {
            throw Error("measured discount delta = " + std::to_string(delta) + " <= 0 along the calibrated curve");
        }
        cal.horizon = horizon;
        cal.delta = delta;
        cal.tail_bound = std::exp(-delta * horizon) * unorm;
        if (cal.tail_bound < cfg.tail_tol) return cal;
        if (horizon + delta_t > cfg.max_tail_horizon * (1.0 + 1e-12)) {
            throw Error("tail certificate not reached within max_tail_horizon = " +
                        std::to_string(cfg.max_tail_horizon));
        }
    }
}

namespace {

std::string calibrated_inputs(const LagrangianModel& model, const CalibratedCurve& cal) {
    std::ostringstream os;
    os.precision(6);
    os << "x=" << point_text(cal.curve.points.back(), model.dimension()) << " T=" << cal.horizon
       << " pieces=" << cal.pieces << " delta=" << cal.delta;
    return os.str();
}

FormulaReport with_tail(FormulaReport r, const CalibratedCurve& cal) {
    r.horizon = cal.horizon;
    r.tail_bound = cal.tail_bound;
    r.delta = cal.delta;
    return r;
}

}  // namespace

FormulaReport rep_IV(const LagrangianModel& model, const CalibratedCurve& cal) {
    const auto terms = integrating_factor_terms(model, cal.trajectory);
    return with_tail(make_report(FormulaId::IV, "", terms.integral, calibrated_inputs(model, cal)), cal);
}

FormulaReport rep_IV(const LagrangianModel& model, const StationaryResult& fixed, int node, const SolverConfig& cfg) {
    return rep_IV(model, backward_calibrated_curve(model, fixed, node, cfg));
}

FormulaReport rep_V(const LagrangianModel& model, const CalibratedCurve& cal, const SolverConfig& cfg) {
    if (!model.declares(Condition::L5)) throw PreconditionError("rep_V needs a model declaring (L5)");
    if (!model.declares(Condition::L6)) throw PreconditionError("rep_V needs a model declaring (L6)");
    const int seg = cal.curve.segments() / cal.pieces;
    const DomainDescriptor& domain = model.domain();
    SolverConfig local = cfg;
    local.curve_nodes = seg - 1;
    // v(-T) = 0: the value is the truncated integral, as for rep_IV. The end value
    // of each piece is increasing in its start value, so the pieces can be
    // minimized one after another.
    double v = 0.0;
    for (int j = cal.pieces - 1; j >= 0; --j) {
        const int first = (cal.pieces - 1 - j) * seg;
        const Curve piece = sub_curve(cal.curve, first, seg);
        HerglotzOptions opts;
        opts.warm_starts = {piece};
        const HerglotzResult r =
            linearized_fundamental_solution(model, piece.t_start, piece.t_end, domain.wrap(piece.points.front()),
                                            domain.wrap(piece.points.back()), v, cal.trajectory, local, opts);
        v = r.end_value();
    }
    return with_tail(make_report(FormulaId::V, "", v, calibrated_inputs(model, cal)), cal);
}

FormulaReport disc_stationary(const LagrangianModel& model, const CalibratedCurve& cal) {
    const double lambda = require_discount(model);
    const double v = weighted_action(model, cal.curve, [&](double s) { return std::exp(lambda * s); });
    return with_tail(make_report(FormulaId::DISC_S, "", v, calibrated_inputs(model, cal)), cal);
}

TimeRescalingReport time_rescaling_check(const TonelliSpec& l0, double lambda, const GridFunction& phi,
                                         double final_time, int steps, const SolverConfig& cfg) {
    const LagrangianModel discounted = make_discounted(l0, lambda);
    const LagrangianModel rescaled = make_time_rescaled(l0, lambda, final_time);
    TimeRescalingReport rep;
    rep.lambda = lambda;
    rep.final_time = final_time;
    rep.u = evolve(discounted, phi, final_time, steps, cfg).frames.back();
    rep.v = evolve(rescaled, phi, final_time, steps, cfg).frames.back();
    const double w = std::exp(lambda * final_time);
    for (std::size_t k = 0; k < rep.u.size(); ++k) {
        rep.defect = std::max(rep.defect, std::abs(rep.v[k] - w * rep.u[k]));
    }
    return rep;
}

}  // namespace hj
