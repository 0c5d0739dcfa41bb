#include <doctest.h>

#include <cmath>

#include "hj/herglotz.hpp"
#include "hj/lax_oleinik.hpp"
#include "hj/random.hpp"
#include "hj/repformulas.hpp"
#include "support.hpp"

using namespace hj;
using hjtest::mechanical;
using hjtest::unit_line;
using hjtest::unit_square;

namespace {

SolverConfig coarse(int resolution) {
    SolverConfig cfg;
    cfg.resolution = resolution;
    cfg.curve_nodes = 6;
    cfg.substeps = 4;
    cfg.random_starts = 0;
    cfg.threads = 1;
    return cfg;
}

GridFunction random_grid(const DomainDescriptor& d, int n, Rng& rng, double amp) {
    GridFunction g(d, n, 0.0);
    const double a = rng.uniform(-amp, amp), b = rng.uniform(-amp, amp);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double x = g.node(k)[0];
        g[k] = a * std::cos(2 * M_PI * x) + b * std::sin(4 * M_PI * x) + rng.uniform(-0.1, 0.1);
    }
    return g;
}

}  // namespace

TEST_CASE("property: T is monotone and contracts on (L6) models") {
    const auto m = make_nonlinear_concave(mechanical(unit_line(), 1.0), 1.0, 0.5);
    const auto cfg = coarse(8);
    const double dt = 0.3;
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_grid(unit_line(), 8, rng, 1.0);
        auto b = a;
        for (auto& v : b.values) v += rng.uniform(0.0, 0.5);
        const auto ta = apply_T(m, a, 0.0, dt, cfg).u;
        const auto tb = apply_T(m, b, 0.0, dt, cfg).u;
        for (std::size_t k = 0; k < ta.size(); ++k) CHECK(ta[k] <= tb[k] + 1e-10);
        const double factor = std::exp(m.constants().K * dt);
        CHECK(sup_distance(ta, tb) <= factor * sup_distance(a, b) + 1e-10);
        // Under (L6) with L_u <= -(lambda - eps) the factor is at most e^{-0.5 dt}.
        CHECK(sup_distance(ta, tb) <= std::exp(-0.5 * dt) * sup_distance(a, b) + 1e-9);
    }
}

TEST_CASE("property: T commutes with constants on the discounted model") {
    const auto m = make_discounted(mechanical(unit_line(), 0.6), 1.5);
    const auto cfg = coarse(8);
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_grid(unit_line(), 8, rng, 1.0);
        const double c = rng.uniform(-2, 2);
        auto b = a;
        for (auto& v : b.values) v += c;
        const auto ta = apply_T(m, a, 0.0, 0.4, cfg).u;
        const auto tb = apply_T(m, b, 0.0, 0.4, cfg).u;
        for (std::size_t k = 0; k < ta.size(); ++k) CHECK(tb[k] - ta[k] == doctest::Approx(c * std::exp(-0.6)).epsilon(1e-8));
    }
}

TEST_CASE("property: h_L is translation invariant when V = 0") {
    const auto m = make_nonlinear_concave(mechanical(unit_square()), 1.0, 0.5);
    SolverConfig cfg = coarse(8);
    cfg.curve_nodes = 8;
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const Coord x{rng.uniform(0, 1), rng.uniform(0, 1)};
        const Coord y{rng.uniform(0, 1), rng.uniform(0, 1)};
        const Coord s{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        const double u0 = rng.uniform(-1, 1);
        const auto a = fundamental_solution(m, 0.0, 0.7, x, y, u0, cfg);
        const auto b = fundamental_solution(m, 0.0, 0.7, x + s, y + s, u0, cfg);
        CHECK(a.value == doctest::Approx(b.value).epsilon(1e-9));
    }
}

TEST_CASE("property: the direct solve never exceeds a composition through a midpoint") {
    const auto m = make_nonlinear_concave(mechanical(unit_line(), 1.0), 1.0, 0.5);
    SolverConfig cfg = coarse(8);
    cfg.curve_nodes = 11;
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const Coord x{rng.uniform(0, 1), 0}, z{rng.uniform(0, 1), 0}, y{rng.uniform(0, 1), 0};
        const double u0 = rng.uniform(-1, 1);
        const auto direct = fundamental_solution(m, 0.0, 1.0, x, z, u0, cfg);
        SolverConfig half = cfg;
        half.curve_nodes = 5;
        const auto first = fundamental_solution(m, 0.0, 0.5, x, y, u0, half);
        const auto second = fundamental_solution(m, 0.5, 1.0, y, z, first.end_value(), half);
        CHECK(direct.end_value() <= second.end_value() + 1e-9);
    }
}

TEST_CASE("property: gauge independence of the splitting formula") {
    const auto m = make_nonlinear_concave(mechanical(unit_line(), 1.0), 1.2, 0.6);
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        Curve c = Curve::straight(unit_line(), 0.0, rng.uniform(0.2, 1.5), {rng.uniform(0, 1), 0},
                                  {rng.uniform(0, 1), 0}, 16);
        for (int i = 1; i < 16; ++i) c.points[static_cast<std::size_t>(i)][0] += rng.uniform(-0.1, 0.1);
        const auto traj = solve_caratheodory(m, c, rng.uniform(-2, 2), 8);
        const Gauge g = rng.uniform() < 0.5 ? gauge_constant(rng.uniform(-3, 3))
                                            : gauge_sine(rng.uniform(0, 2), rng.uniform(0.1, 3), rng.uniform(-1, 1));
        const double budget = 1e-5 * (1 + std::abs(traj.end_value()));
        INFO(g.name);
        CHECK(std::abs(gaugeF_splitting_value(m, traj, g) - traj.end_value()) < budget);
        CHECK(std::abs(hatLu_splitting_value(m, traj) - traj.end_value()) < budget);
    }
}

TEST_CASE("property: formulas agree at random points") {
    const auto m = make_discounted(mechanical(unit_line(), 1.0), 0.7);
    auto cfg = coarse(12);
    cfg.curve_nodes = 15;
    cfg.substeps = 8;
    Rng rng(41);
    const auto phi = random_grid(unit_line(), 12, rng, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const auto set = evolution_candidates(m, phi, rng.uniform(0.2, 1.0), {rng.uniform(0, 1), 0}, cfg);
        const double ref = rep_I(m, set).value;
        for (double v : {rep_II(m, set).value, rep_III(m, phi, set, cfg).value, rep_VI(m, set).value,
                         rep_VII(m, set, gauge_canonical()).value, disc_evolution(m, set).value}) {
            CHECK(std::abs(v - ref) < 1e-5 * (1 + std::abs(ref)));
        }
    }
}
