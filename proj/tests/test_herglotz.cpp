#include <doctest.h>

#include <cmath>

#include "hj/caratheodory.hpp"
#include "hj/errors.hpp"
#include "hj/herglotz.hpp"
#include "hj/random.hpp"
#include "support.hpp"

using namespace hj;
using hjtest::free_particle;
using hjtest::mechanical;
using hjtest::unit_line;
using hjtest::unit_square;

namespace {

SolverConfig small_config() {
    SolverConfig cfg;
    cfg.curve_nodes = 15;
    cfg.random_starts = 2;
    return cfg;
}

Curve wiggly(const DomainDescriptor& d, Rng& rng, const Coord& x, const Coord& y, int segments, double amp) {
    Curve c = Curve::straight(d, 0.0, 1.0, x, y, segments);
    for (int i = 1; i < segments; ++i) {
        for (int a = 0; a < d.dimension; ++a) c.points[i][a] += amp * rng.uniform(-1, 1);
    }
    return c;
}

/// Central differences of the end value with respect to interior node coordinates.
std::vector<Coord> fd_gradient(const LagrangianModel& m, Curve c, double u0, int substeps, double h = 1e-5) {
    std::vector<Coord> g(c.segments() - 1, Coord{0, 0});
    for (int i = 1; i < c.segments(); ++i) {
        for (int a = 0; a < c.dimension; ++a) {
            const double keep = c.points[i][a];
            c.points[i][a] = keep + h;
            const double up = solve_caratheodory(m, c, u0, substeps).end_value();
            c.points[i][a] = keep - h;
            const double dn = solve_caratheodory(m, c, u0, substeps).end_value();
            c.points[i][a] = keep;
            g[i - 1][a] = (up - dn) / (2 * h);
        }
    }
    return g;
}

}  // namespace

TEST_CASE("free particle value on the circle") {
    const auto res = fundamental_solution(free_particle(), 0, 1, {0, 0}, {0.25, 0}, 0.0, small_config());
    CHECK(res.converged);
    CHECK(std::abs(res.value - 0.03125) < 1e-6);
    CHECK(res.minimizer.displacement()[0] == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(res.end_value() == doctest::Approx(res.trajectory.end_value()));
    CHECK(res.stationarity_residual < 1e-6);
}

TEST_CASE("discounted free particle") {
    const auto m = free_particle(1.0);
    const auto res = fundamental_solution(m, 0, 1, {0, 0}, {0.25, 0}, 0.0, small_config());
    // Minimizing int e^{s-1} v^2/2 ds with int v ds = d gives v ~ e^{-s} and
    // value d^2 / (2 (e - 1)); the constant-speed curve gives (d^2/2)(1 - e^{-1}).
    const double exact = 0.0625 / (2 * (std::exp(1.0) - 1));
    CHECK(std::abs(res.value - exact) < 1e-5);
    CHECK(res.value < 0.03125 * (1 - std::exp(-1.0)));
    CHECK(res.stationarity_residual < 1e-4);

    // Independent oracle: dense grid over curves with two interior nodes.
    double best = 1e300;
    for (int i = 0; i <= 200; ++i) {
        for (int j = 0; j <= 200; ++j) {
            Curve c = Curve::straight(m.domain(), 0, 1, {0, 0}, {0.25, 0}, 3);
            c.points[1][0] = -0.1 + 0.35 * i / 200.0;
            c.points[2][0] = 0.0 + 0.35 * j / 200.0;
            best = std::min(best, solve_caratheodory(m, c, 0.0).end_value());
        }
    }
    CHECK(res.value <= best + 1e-9);
    CHECK(std::abs(res.value - best) < 1e-3);
}

TEST_CASE("constant curve is optimal when x = y and V = 0") {
    for (double lambda : {0.0, 0.5, 2.0}) {
        const auto res = fundamental_solution(free_particle(lambda), 0, 1, {0.4, 0}, {0.4, 0}, 0.0, small_config());
        CHECK(std::abs(res.value) < 1e-10);
        for (const auto& p : res.minimizer.points) CHECK(p[0] == doctest::Approx(0.4));
    }
}

TEST_CASE("winding completeness") {
    Rng rng(2);
    SolverConfig cfg = small_config();
    cfg.max_winding = 2;
    for (int i = 0; i < 10; ++i) {
        const double x = rng.uniform(), y = rng.uniform(), t = rng.uniform(0.2, 1.0);
        const auto res = fundamental_solution(free_particle(), 0, t, {x, 0}, {y, 0}, 0.0, cfg);
        double best = 1e300;
        for (int k = -2; k <= 2; ++k) {
            const double d = y - x + k;
            best = std::min(best, d * d / (2 * t));
        }
        CHECK(std::abs(res.value - best) < 1e-5);
    }
}

TEST_CASE("preconditions") {
    CHECK_THROWS_AS((void)fundamental_solution(free_particle(), 0, 1e-4, {0, 0}, {0, 0}, 0.0, small_config()),
                    PreconditionError);
    CHECK_THROWS_AS((void)fundamental_solution(free_particle(), 0, 1, {0, 0}, {0, 0}, std::nan(""), small_config()),
                    PreconditionError);
}

TEST_CASE("non-convergence carries diagnostics") {
    SolverConfig cfg = small_config();
    cfg.max_iterations = 1;
    cfg.grad_tol = 1e-14;
    const auto m = make_discounted(mechanical(unit_line(), 1.0), 1.0);
    try {
        (void)fundamental_solution(m, 0, 1, {0.1, 0}, {0.6, 0}, 0.3, cfg);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(std::string(e.diagnostics()).find("\"starts\"") != std::string::npos);
    }
}

TEST_CASE("adjoint gradient matches finite differences") {
    Rng rng(17);
    const std::vector<LagrangianModel> models{
        make_discounted(mechanical(unit_line(), 1.0), 1.0),
        make_nonlinear_concave(mechanical(unit_line(), 0.8), 1.0, 0.5),
        make_nonlinear_concave(mechanical(unit_square(), 0.8), 1.5, 0.7),
        make_time_rescaled(mechanical(unit_square(), 1.0), 0.5),
    };
    double worst = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto& m = models[trial % models.size()];
        const auto& d = m.domain();
        const Curve c = wiggly(d, rng, {rng.uniform(), rng.uniform()}, {rng.uniform(), rng.uniform()}, 8, 0.1);
        const double u0 = rng.uniform(-1, 1);
        const auto traj = solve_caratheodory(m, c, u0, 4);
        const auto g = adjoint_gradient(m, c, traj);
        const auto fd = fd_gradient(m, c, u0, 4);
        double scale = 1.0;
        for (const auto& v : fd) scale = std::max(scale, sup_norm(v));
        for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, sup_norm(g[i] - fd[i]) / scale);
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("gradient vanishes at an equilibrium") {
    // V = cos(2 pi x) has a critical point at x = 0; with lambda = 1 the
    // equilibrium u solves 0 = -V(0) - u, i.e. u = -1.
    const auto m = make_discounted(mechanical(unit_line(), 1.0), 1.0);
    const Curve c = Curve::straight(m.domain(), 0, 1, {0, 0}, {0, 0}, 8);
    const auto traj = solve_caratheodory(m, c, -1.0);
    for (const auto& g : adjoint_gradient(m, c, traj)) CHECK(sup_norm(g) < 1e-12);
}

TEST_CASE("one interior node with quadratic L0") {
    // u0 = 0, lambda = 0: J(p) = (p - x)^2 / (2 h) + (y - p)^2 / (2 h), minimized at the midpoint.
    const auto m = free_particle();
    Curve c = Curve::straight(m.domain(), 0, 1, {0.1, 0}, {0.3, 0}, 2);
    double grads[2];
    const double probes[2] = {0.15, 0.25};
    for (int k = 0; k < 2; ++k) {
        c.points[1][0] = probes[k];
        grads[k] = adjoint_gradient(m, c, solve_caratheodory(m, c, 0.0))[0][0];
    }
    const double root = probes[0] - grads[0] * (probes[1] - probes[0]) / (grads[1] - grads[0]);
    CHECK(root == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("stationarity residual") {
    const auto m = make_nonlinear_concave(mechanical(unit_line(), 1.0), 1.0, 0.5);
    SolverConfig cfg = small_config();
    cfg.curve_nodes = 63;
    const auto res = fundamental_solution(m, 0, 1, {0.1, 0}, {0.45, 0}, 0.2, cfg);
    CHECK(res.stationarity_residual < 1e-3);
    Curve bumped = res.minimizer;
    bumped.points[32][0] += 0.05;
    const auto traj = solve_caratheodory(m, bumped, 0.2, cfg.substeps);
    CHECK(herglotz_residual(m, bumped, traj) > 10 * res.stationarity_residual);

    const auto free = free_particle();
    const Curve line = Curve::straight(free.domain(), 0, 1, {0.1, 0}, {0.7, 0}, 16);
    CHECK(herglotz_residual(free, line, solve_caratheodory(free, line, 0.0)) < 1e-6);
}

TEST_CASE("refining the curve never raises the value") {
    const auto m = make_nonlinear_concave(mechanical(unit_line(), 1.0), 1.0, 0.5);
    SolverConfig coarse = small_config();
    coarse.curve_nodes = 7;
    SolverConfig fine = coarse;
    fine.curve_nodes = 15;
    Rng rng(9);
    for (int i = 0; i < 5; ++i) {
        const Coord x{rng.uniform(), 0}, y{rng.uniform(), 0};
        const double a = fundamental_solution(m, 0, 0.8, x, y, 0.1, coarse).value;
        const double b = fundamental_solution(m, 0, 0.8, x, y, 0.1, fine).value;
        CHECK(b <= a + 1e-6);
    }
}

TEST_CASE("monotone in u0 along fixed curves under (L6)") {
    const auto m = make_nonlinear_concave(mechanical(unit_square(), 1.0), 1.0, 0.5);
    Rng rng(12);
    for (int i = 0; i < 20; ++i) {
        const Curve c = wiggly(m.domain(), rng, {rng.uniform(), rng.uniform()}, {rng.uniform(), rng.uniform()}, 8, 0.1);
        const double a = rng.uniform(-2, 2);
        const double b = a + rng.uniform(0.01, 1.0);
        // u_end(u0) is increasing in u0 (positive Gronwall factor); the integral u_end - u0 decreases.
        const double ea = solve_caratheodory(m, c, a).end_value();
        const double eb = solve_caratheodory(m, c, b).end_value();
        CHECK(eb > ea);
        CHECK(eb - b < ea - a);
        CHECK(eb - ea <= std::exp(-0.5) * (b - a) + 1e-12);
    }
}

TEST_CASE("linearized fundamental solution") {
    const auto disc = make_discounted(mechanical(unit_line(), 1.0), 1.0);
    const auto nl = make_nonlinear_concave(mechanical(unit_line(), 1.0), 1.0, 0.5);
    SolverConfig cfg = small_config();
    Rng rng(27);
    for (int i = 0; i < 6; ++i) {
        const Coord x{rng.uniform(), 0}, y{rng.uniform(), 0};
        const double u0 = rng.uniform(-1, 1);
        const auto& m = i % 2 ? nl : disc;
        const auto ref = fundamental_solution(m, 0, 1, x, y, u0, cfg);
        const auto lin = linearized_fundamental_solution(m, 0, 1, x, y, u0, ref.trajectory, cfg);
        CHECK(std::abs(lin.value - ref.value) < 1e-4);
        const double reeval = solve_caratheodory(m, lin.minimizer, u0, cfg.substeps).end_value() - u0;
        CHECK(std::abs(reeval - ref.value) < 1e-4);
        const double frozen_self =
            solve_linearized(m, ref.minimizer, ref.trajectory, u0, cfg.substeps).end_value();
        CHECK(std::abs(frozen_self - ref.end_value()) < 1e-8);
    }
}

TEST_CASE("lower bound is valid") {
    const auto m = make_nonlinear_concave(mechanical(unit_line(), 1.0), 1.0, 0.5);
    Rng rng(33);
    for (int i = 0; i < 20; ++i) {
        const Curve c = wiggly(m.domain(), rng, {rng.uniform(), 0}, {rng.uniform(), 0}, 8, 0.2);
        const double u0 = rng.uniform(-2, 2);
        const double lb = action_lower_bound(m, u0, 1.0, norm(c.displacement()));
        CHECK(lb <= solve_caratheodory(m, c, u0).end_value());
    }
    const LagrangianModel bare(
        unit_line(), [](double, const Coord&, const Coord&, double) { return LagrangianJet{}; }, ConditionSet{},
        ModelConstants{}, "user", false);
    CHECK(std::isinf(action_lower_bound(bare, 0.0, 1.0, 1.0)));
}

TEST_CASE("results are deterministic") {
    const auto m = make_nonlinear_concave(mechanical(unit_square(), 1.0), 1.0, 0.5);
    const auto a = fundamental_solution(m, 0, 0.7, {0.1, 0.2}, {0.8, 0.6}, 0.3, small_config());
    const auto b = fundamental_solution(m, 0, 0.7, {0.1, 0.2}, {0.8, 0.6}, 0.3, small_config());
    CHECK(a.value == b.value);
    CHECK(a.minimizer.points == b.minimizer.points);
}
