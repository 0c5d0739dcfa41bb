#include <doctest.h>

#include <cmath>

#include "hj/errors.hpp"
#include "hj/fd_oracle.hpp"
#include "hj/lax_oleinik.hpp"
#include "hj/random.hpp"
#include "support.hpp"

using namespace hj;
using hjtest::free_particle;
using hjtest::mechanical;
using hjtest::unit_line;
using hjtest::unit_square;

TEST_CASE("fd_oracle: closed-form Hamiltonians agree with the numerical Legendre transform") {
    TonelliSpec spec = mechanical(unit_square(), 0.7);
    spec.kinetic = {2.0, 0.3, 1.0};
    const std::vector<LagrangianModel> models{make_discounted(spec, 0.8), make_nonlinear_concave(spec, 1.0, 0.4),
                                              make_time_rescaled(spec, 0.6, 2.0)};
    Rng rng(11);
    for (const auto& m : models) {
        const auto closed = closed_form_hamiltonian(m);
        REQUIRE(closed.has_value());
        const auto numeric = legendre_to_hamiltonian(m);
        for (int i = 0; i < 40; ++i) {
            const double s = rng.uniform(-1, 1);
            const Coord x{rng.uniform(0, 1), rng.uniform(0, 1)};
            const Coord p{rng.uniform(-3, 3), rng.uniform(-3, 3)};
            const double u = rng.uniform(-2, 2);
            const auto a = closed->jet(s, x, p, u);
            const auto b = numeric.jet(s, x, p, u);
            CHECK(a.value == doctest::Approx(b.value).epsilon(1e-8));
            CHECK(a.du == doctest::Approx(b.du).epsilon(1e-6));
            CHECK(a.dp[0] == doctest::Approx(b.dp[0]).epsilon(1e-6));
            CHECK(a.dp[1] == doctest::Approx(b.dp[1]).epsilon(1e-6));
        }
    }
    CHECK_FALSE(closed_form_hamiltonian(legendre_to_lagrangian(*closed_form_hamiltonian(models[0]))).has_value());
}

TEST_CASE("fd_oracle: constant data with V = 0 converges at first order") {
    const auto h = *closed_form_hamiltonian(free_particle(1.0));
    std::vector<double> errors;
    for (int n : {16, 64}) {
        FDConfig cfg;
        cfg.resolution = n;
        cfg.t_end = 1.0;
        const auto r = fd_evolve(h, GridFunction(unit_line(), n, 1.0), cfg);
        CHECK(r.time == doctest::Approx(1.0));
        double err = 0.0;
        for (double v : r.u.values) err = std::max(err, std::abs(v - std::exp(-1.0)));
        errors.push_back(err);
    }
    CHECK(errors[0] < 0.02);
    CHECK(errors[0] / errors[1] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("fd_oracle: the scheme is monotone") {
    const auto h = *closed_form_hamiltonian(make_discounted(mechanical(unit_line(), 1.0), 1.0));
    FDConfig cfg;
    cfg.resolution = 32;
    cfg.t_end = 0.5;
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        auto a = GridFunction::sample(unit_line(), 32, [](const Coord& x) { return std::sin(2 * M_PI * x[0]); });
        auto b = a;
        for (auto& v : b.values) v += rng.uniform(0, 0.2);
        const auto ua = fd_evolve(h, a, cfg).u;
        const auto ub = fd_evolve(h, b, cfg).u;
        for (std::size_t k = 0; k < ua.size(); ++k) CHECK(ua[k] <= ub[k] + 1e-12);
    }
}

TEST_CASE("fd_oracle: first-order agreement with Lax-Oleinik") {
    const auto m = make_discounted(mechanical(unit_line(), 1.0), 1.0);
    const auto h = *closed_form_hamiltonian(m);
    SolverConfig lo;
    lo.resolution = 32;
    lo.curve_nodes = 8;
    lo.substeps = 4;
    lo.random_starts = 0;
    const auto phi = GridFunction::sample(unit_line(), 32, [](const Coord& x) { return std::cos(2 * M_PI * x[0]); });
    const auto u = evolve(m, phi, 0.5, 1, lo).frames.back();
    double prev = 1e300;
    for (int n : {32, 64, 128}) {
        FDConfig cfg;
        cfg.resolution = n;
        cfg.t_end = 0.5;
        const auto f = fd_evolve(h, GridFunction::sample(unit_line(), n, [](const Coord& x) {
                                     return std::cos(2 * M_PI * x[0]);
                                 }), cfg).u;
        double d = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) d = std::max(d, std::abs(u[k] - f[k * (n / 32)]));
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("fd_oracle: stationary limit and viscosity diagnostics") {
    const auto h = *closed_form_hamiltonian(free_particle(1.0));
    FDConfig cfg;
    cfg.resolution = 16;
    const auto r = fd_stationary(h, cfg);
    CHECK(r.u.sup_norm() < 1e-6);

    const auto hv = *closed_form_hamiltonian(free_particle(1.0));
    // |H_p| reaches 0.2 pi > 0.5 on this data.
    cfg.artificial_viscosity = {0.5, 0.5};
    cfg.t_end = 0.2;
    const auto phi =
        GridFunction::sample(unit_line(), 16, [](const Coord& x) { return 0.1 * std::sin(2 * M_PI * x[0]); });
    CHECK(fd_evolve(hv, phi, cfg).viscosity_below_hp);

    CHECK_THROWS_AS((void)fd_stationary(*closed_form_hamiltonian(free_particle(0.0)), FDConfig{}), PreconditionError);
}

TEST_CASE("fd_oracle: config validation names the key") {
    FDConfig cfg;
    cfg.cfl = 1.5;
    try {
        cfg.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "fd.cfl");
    }
    cfg = FDConfig{};
    cfg.resolution = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
