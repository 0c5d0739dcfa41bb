#include <doctest.h>

#include <cmath>

#include "hj/errors.hpp"
#include "hj/grid.hpp"
#include "hj/random.hpp"
#include "support.hpp"

using namespace hj;
using hjtest::unit_line;
using hjtest::unit_square;

TEST_CASE("grid: nodes, indices and periodic wrap") {
    GridFunction g(DomainDescriptor{2, {2.0, 1.0}}, 4, 0.0);
    CHECK(g.size() == 16);
    CHECK(g.spacing(0) == doctest::Approx(0.5));
    CHECK(g.spacing(1) == doctest::Approx(0.25));
    CHECK(g.index(1, 2) == 1 + 4 * 2);
    CHECK(g.index(-1, 4) == g.index(3, 0));
    const Coord x = g.node(g.index(3, 1));
    CHECK(x[0] == doctest::Approx(1.5));
    CHECK(x[1] == doctest::Approx(0.25));
}

TEST_CASE("grid: interpolation reproduces nodes and is exact for affine data inside a cell") {
    const auto d = unit_square();
    const auto g = GridFunction::sample(d, 8, [](const Coord& x) { return std::sin(2 * M_PI * x[0]) + x[1] * x[1]; });
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(g.interpolate(g.node(k)) == doctest::Approx(g[k]).epsilon(1e-14));

    // Bilinear data is reproduced exactly away from the wrap seam.
    const auto b = GridFunction::sample(d, 8, [](const Coord& x) { return 1 + 2 * x[0] - x[1] + 3 * x[0] * x[1]; });
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        const Coord x{rng.uniform(0, 0.875), rng.uniform(0, 0.875)};
        CHECK(b.interpolate(x) == doctest::Approx(1 + 2 * x[0] - x[1] + 3 * x[0] * x[1]).epsilon(1e-12));
    }
    // Periodic images interpolate to the same value.
    CHECK(g.interpolate({0.3 + 3.0, 0.7 - 2.0}) == doctest::Approx(g.interpolate({0.3, 0.7})));
}

TEST_CASE("grid: seam interpolation uses the wrapped neighbour") {
    GridFunction g(unit_line(), 4, 0.0);
    g[3] = 1.0;  // node 0.75; node 0 stays 0
    CHECK(g.interpolate({0.875, 0}) == doctest::Approx(0.5));
    CHECK(g.interpolate({-0.125, 0}) == doctest::Approx(0.5));
}

TEST_CASE("grid: norms and validation") {
    GridFunction a(unit_line(), 5, 1.0);
    GridFunction b(unit_line(), 5, 1.0);
    b[2] = -2.0;
    CHECK(sup_distance(a, b) == doctest::Approx(3.0));
    CHECK(b.sup_norm() == doctest::Approx(2.0));
    CHECK(b.min() == -2.0);
    CHECK(b.max() == 1.0);
    b[1] = std::nan("");
    CHECK_THROWS_AS(b.validate(), PreconditionError);
    CHECK_THROWS_AS((void)sup_distance(a, GridFunction(unit_line(), 6)), PreconditionError);
    CHECK_THROWS_AS(GridFunction(unit_line(), 1), PreconditionError);
}
