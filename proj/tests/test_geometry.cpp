#include <doctest.h>

#include "hj/errors.hpp"
#include "hj/geometry.hpp"
#include "hj/random.hpp"

using hj::Coord;
using hj::DomainDescriptor;

TEST_CASE("domain validation") {
    CHECK_THROWS_AS((DomainDescriptor{3, {1.0, 1.0}}.validate()), hj::PreconditionError);
    CHECK_THROWS_AS((DomainDescriptor{1, {0.0, 1.0}}.validate()), hj::PreconditionError);
    CHECK_NOTHROW((DomainDescriptor{2, {1.0, 2.0}}.validate()));
}

TEST_CASE("wrap and nearest displacement") {
    const DomainDescriptor d{2, {1.0, 2.0}};
    const Coord w = d.wrap({-0.25, 4.5});
    CHECK(w[0] == doctest::Approx(0.75));
    CHECK(w[1] == doctest::Approx(0.5));
    const Coord disp = d.nearest_displacement({0.9, 0.1}, {0.1, 1.9});
    CHECK(disp[0] == doctest::Approx(0.2));
    CHECK(disp[1] == doctest::Approx(-0.2));
    CHECK(d.distance({0.0, 0.0}, {0.5, 1.0}) == doctest::Approx(std::sqrt(0.25 + 1.0)));
    const DomainDescriptor line{1, {1.0, 1.0}};
    CHECK(line.wrap({0.3, 7.0})[1] == 0.0);
}

TEST_CASE("distance is a metric on random triples") {
    hj::Rng rng(7);
    for (int dim = 1; dim <= 2; ++dim) {
        const DomainDescriptor d{dim, {1.0, 1.5}};
        for (int i = 0; i < 1000; ++i) {
            auto draw = [&] { return Coord{rng.uniform(-3, 3), dim == 2 ? rng.uniform(-3, 3) : 0.0}; };
            const Coord a = draw(), b = draw(), c = draw();
            CHECK(d.distance(a, a) == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(d.distance(a, b) == doctest::Approx(d.distance(b, a)));
            CHECK(d.distance(a, c) <= d.distance(a, b) + d.distance(b, c) + 1e-12);
            CHECK(d.distance(a, b) >= 0.0);
        }
    }
}

TEST_CASE("rng streams are reproducible and distinct") {
    hj::Rng a(5, 1), b(5, 1), c(5, 2);
    for (int i = 0; i < 10; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    CHECK(a.uniform() != c.uniform());
}
