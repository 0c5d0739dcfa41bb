#include "hj/grid.hpp"

#include <algorithm>
#include <cmath>

#include "hj/errors.hpp"

namespace hj {

GridFunction::GridFunction(const DomainDescriptor& d, int n, double fill) : domain(d), resolution(n) {
    domain.validate();
    if (n < 2) throw PreconditionError("grid resolution must be >= 2");
    const std::size_t count = d.dimension == 2 ? static_cast<std::size_t>(n) * n : static_cast<std::size_t>(n);
    values.assign(count, fill);
}

GridFunction GridFunction::sample(const DomainDescriptor& d, int n, const std::function<double(const Coord&)>& fn) {
    GridFunction g(d, n);
    for (std::size_t k = 0; k < g.size(); ++k) g.values[k] = fn(g.node(k));
    return g;
}

Coord GridFunction::node(std::size_t k) const {
    const auto n = static_cast<std::size_t>(resolution);
    if (domain.dimension == 1) return {static_cast<double>(k) * spacing(0), 0.0};
    return {static_cast<double>(k % n) * spacing(0), static_cast<double>(k / n) * spacing(1)};
}

std::size_t GridFunction::index(int i, int j) const {
    const int n = resolution;
    i = ((i % n) + n) % n;
    if (domain.dimension == 1) return static_cast<std::size_t>(i);
    j = ((j % n) + n) % n;
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * static_cast<std::size_t>(j);
}

double GridFunction::interpolate(const Coord& x) const {
    const Coord w = domain.wrap(x);
    int base[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    for (int a = 0; a < domain.dimension; ++a) {
        const double r = w[a] / spacing(a);
        const double f = std::floor(r);
        base[a] = static_cast<int>(f);
        frac[a] = r - f;
    }
    if (domain.dimension == 1) {
        return (1.0 - frac[0]) * values[index(base[0])] + frac[0] * values[index(base[0] + 1)];
    }
    const double v00 = values[index(base[0], base[1])];
    const double v10 = values[index(base[0] + 1, base[1])];
    const double v01 = values[index(base[0], base[1] + 1)];
    const double v11 = values[index(base[0] + 1, base[1] + 1)];
    return (1.0 - frac[1]) * ((1.0 - frac[0]) * v00 + frac[0] * v10) +
           frac[1] * ((1.0 - frac[0]) * v01 + frac[0] * v11);
}

double GridFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::min() const { return *std::min_element(values.begin(), values.end()); }
double GridFunction::max() const { return *std::max_element(values.begin(), values.end()); }

void GridFunction::validate() const {
    domain.validate();
    if (resolution < 2) throw PreconditionError("grid resolution must be >= 2");
    const std::size_t n = static_cast<std::size_t>(resolution);
    if (values.size() != (domain.dimension == 2 ? n * n : n)) throw PreconditionError("grid size mismatch");
    for (double v : values) {
        if (!std::isfinite(v)) throw PreconditionError("grid values must be finite");
    }
}

double sup_distance(const GridFunction& a, const GridFunction& b) {
    if (a.values.size() != b.values.size() || !(a.domain == b.domain)) {
        throw PreconditionError("grids do not match");
    }
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
    return m;
}

}  // namespace hj
