#pragma once

// Fixed-step RK4 along piecewise-linear curves and its discrete adjoint.
// Shared by the Caratheodory solvers and the Herglotz optimizer.

#include <cmath>
#include <vector>

#include "hj/caratheodory.hpp"
#include "hj/errors.hpp"

namespace hj::detail {

struct RhsEval {
    double f = 0.0;
    double fw = 0.0;
    Coord fx{0.0, 0.0};
    Coord fv{0.0, 0.0};
};

/// u' = L(s, x, v, u).
struct HerglotzRhs {
    const LagrangianModel* model;

    RhsEval operator()(double s, const Coord& x, const Coord& v, double w) const {
        const LagrangianJet j = model->jet(s, x, v, w);
        return {j.value, j.du, j.dx, j.dv};
    }
};

/// v' = L(s, x, v, u*(s)) + L_u(s, x, v, u*(s)) (w - u*(s)).
struct LinearizedRhs {
    const LagrangianModel* model;
    const CaratheodoryTrajectory* frozen;

    RhsEval operator()(double s, const Coord& x, const Coord& v, double w) const {
        const double us = frozen->interpolate(s);
        const LagrangianJet j = model->jet(s, x, v, us);
        const double dw = w - us;
        return {j.value + j.du * dw, j.du, j.dx + dw * j.dux, j.dv + dw * j.duv};
    }
};

inline void divergence_guard(double s, double u) {
    if (!std::isfinite(u) || std::abs(u) > kDivergenceLimit) throw DivergenceError(s, u);
}

template <typename Rhs>
double integrate_end(const Rhs& rhs, const Curve& c, double u0, int m) {
    const double big_h = c.dt();
    const double h = big_h / m;
    double u = u0;
    for (int i = 0; i < c.segments(); ++i) {
        const Coord p0 = c.points[i];
        const Coord v = c.velocity(i);
        const double ti = c.time(i);
        for (int j = 0; j < m; ++j) {
            const double tau = j * h;
            const double s = ti + tau;
            const Coord x0 = p0 + tau * v;
            const Coord xm = p0 + (tau + 0.5 * h) * v;
            const Coord x1 = p0 + (tau + h) * v;
            const double k1 = rhs(s, x0, v, u).f;
            const double k2 = rhs(s + 0.5 * h, xm, v, u + 0.5 * h * k1).f;
            const double k3 = rhs(s + 0.5 * h, xm, v, u + 0.5 * h * k2).f;
            const double k4 = rhs(s + h, x1, v, u + h * k3).f;
            u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            divergence_guard(s + h, u);
        }
    }
    return u;
}

template <typename Rhs>
CaratheodoryTrajectory integrate_full(const Rhs& rhs, const Curve& c, double u0, int m) {
    CaratheodoryTrajectory traj;
    traj.curve = c;
    traj.u0 = u0;
    traj.stats.substeps_per_segment = m;
    const int n = c.segments() * m;
    traj.times.resize(n + 1);
    traj.u_values.resize(n + 1);
    const double big_h = c.dt();
    const double h = big_h / m;
    double u = u0;
    traj.times[0] = c.t_start;
    traj.u_values[0] = u0;
    for (int i = 0; i < c.segments(); ++i) {
        const Coord p0 = c.points[i];
        const Coord v = c.velocity(i);
        const double ti = c.time(i);
        for (int j = 0; j < m; ++j) {
            const double tau = j * h;
            const double s = ti + tau;
            const Coord x0 = p0 + tau * v;
            const Coord xm = p0 + (tau + 0.5 * h) * v;
            const Coord x1 = p0 + (tau + h) * v;
            const double k1 = rhs(s, x0, v, u).f;
            const double k2 = rhs(s + 0.5 * h, xm, v, u + 0.5 * h * k1).f;
            const double k3 = rhs(s + 0.5 * h, xm, v, u + 0.5 * h * k2).f;
            const double k4 = rhs(s + h, x1, v, u + h * k3).f;
            u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            divergence_guard(s + h, u);
            traj.stats.max_stage_gap = std::max(traj.stats.max_stage_gap, h * std::abs(k2 - k3));
            const int k = i * m + j + 1;
            traj.times[k] = (j + 1 == m) ? c.time(i + 1) : s + h;
            traj.u_values[k] = u;
        }
    }
    traj.stats.steps = n;
    return traj;
}

/// End value and exact gradient of the discrete RK4 end value with respect to
/// every curve node (endpoints included) and to u0.
struct EndGradient {
    double value = 0.0;
    double d_u0 = 0.0;
    std::vector<Coord> d_points;
    /// Adjoint variable at each curve node, d(value)/d(u at node); approximates
    /// exp(int_{s_i}^{t_end} f_w).
    std::vector<double> node_adjoint;
};

template <typename Rhs>
void integrate_with_gradient(const Rhs& rhs, const Curve& c, double u0, int m, EndGradient& out) {
    struct Stage {
        RhsEval e;
        double theta;
    };
    thread_local std::vector<Stage> tape;
    const int segs = c.segments();
    const int n = segs * m;
    tape.resize(static_cast<std::size_t>(n) * 4);
    const double big_h = c.dt();
    const double h = big_h / m;
    double u = u0;
    for (int i = 0; i < segs; ++i) {
        const Coord p0 = c.points[i];
        const Coord v = c.velocity(i);
        const double ti = c.time(i);
        for (int j = 0; j < m; ++j) {
            const double tau = j * h;
            const double s = ti + tau;
            Stage* st = &tape[static_cast<std::size_t>(i * m + j) * 4];
            st[0] = {rhs(s, p0 + tau * v, v, u), tau / big_h};
            const double k1 = st[0].e.f;
            const Coord xm = p0 + (tau + 0.5 * h) * v;
            st[1] = {rhs(s + 0.5 * h, xm, v, u + 0.5 * h * k1), (tau + 0.5 * h) / big_h};
            const double k2 = st[1].e.f;
            st[2] = {rhs(s + 0.5 * h, xm, v, u + 0.5 * h * k2), (tau + 0.5 * h) / big_h};
            const double k3 = st[2].e.f;
            st[3] = {rhs(s + h, p0 + (tau + h) * v, v, u + h * k3), (tau + h) / big_h};
            const double k4 = st[3].e.f;
            u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            divergence_guard(s + h, u);
        }
    }
    out.value = u;
    out.d_points.assign(c.points.size(), Coord{0.0, 0.0});
    out.node_adjoint.assign(c.points.size(), 1.0);
    double lam = 1.0;
    for (int i = segs - 1; i >= 0; --i) {
        Coord& g0 = out.d_points[i];
        Coord& g1 = out.d_points[i + 1];
        auto add = [&](double weight, const Stage& st) {
            const double a = 1.0 - st.theta;
            for (int d = 0; d < c.dimension; ++d) {
                g0[d] += weight * (a * st.e.fx[d] - st.e.fv[d] / big_h);
                g1[d] += weight * (st.theta * st.e.fx[d] + st.e.fv[d] / big_h);
            }
        };
        for (int j = m - 1; j >= 0; --j) {
            const Stage* st = &tape[static_cast<std::size_t>(i * m + j) * 4];
            double kb1 = lam * h / 6.0;
            double kb2 = lam * h / 3.0;
            double kb3 = lam * h / 3.0;
            const double kb4 = lam * h / 6.0;
            double ub = lam;
            const double wb4 = kb4 * st[3].e.fw;
            add(kb4, st[3]);
            ub += wb4;
            kb3 += h * wb4;
            const double wb3 = kb3 * st[2].e.fw;
            add(kb3, st[2]);
            ub += wb3;
            kb2 += 0.5 * h * wb3;
            const double wb2 = kb2 * st[1].e.fw;
            add(kb2, st[1]);
            ub += wb2;
            kb1 += 0.5 * h * wb2;
            add(kb1, st[0]);
            ub += kb1 * st[0].e.fw;
            lam = ub;
        }
        out.node_adjoint[i] = lam;
    }
    out.d_u0 = lam;
}

}  // namespace hj::detail
